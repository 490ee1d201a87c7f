#include "recomp/errors.hpp"

namespace recomp {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::NotAVideo: return "NotAVideo";
    case Errc::UnsupportedCodec: return "UnsupportedCodec";
    case Errc::EncoderFailure: return "EncoderFailure";
    case Errc::DecoderFailure: return "DecoderFailure";
    case Errc::FrameCountMismatch: return "FrameCountMismatch";
    case Errc::EmptyDebugOutput: return "EmptyDebugOutput";
    case Errc::ToolVersionMismatch: return "ToolVersionMismatch";
    case Errc::Io: return "Io";
    case Errc::Grammar: return "GrammarError";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidBlockSize: return "InvalidBlockSize";
    case Errc::OrphanVector: return "OrphanVector";
    case Errc::MvOnIntra: return "MvOnIntra";
    case Errc::NoPFrames: return "NoPFrames";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::SingleClassInput: return "SingleClassInput";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::ScalingMismatch: return "ScalingMismatch";
    case Errc::InsufficientTrainingData: return "InsufficientTrainingData";
    }
    return "UnknownError";
}

} // namespace recomp
