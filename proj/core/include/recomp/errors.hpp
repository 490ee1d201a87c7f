#pragma once

#include <stdexcept>
#include <string>

namespace recomp {

enum class Errc {
    // io / orchestration
    FileNotFound,
    NotAVideo,
    UnsupportedCodec,
    EncoderFailure,
    DecoderFailure,
    FrameCountMismatch,
    EmptyDebugOutput,
    ToolVersionMismatch,
    Io,
    // parsing
    Grammar,
    DimensionMismatch,
    InvalidBlockSize,
    OrphanVector,
    MvOnIntra,
    // feature math
    NoPFrames,
    EmptyTrainingSet,
    LengthMismatch,
    // svm / harness
    SingleClassInput,
    InsufficientSamples,
    ScalingMismatch,
    InsufficientTrainingData,
};

const char* errc_name(Errc c);

/// Library-wide exception. `line()` is >= 1 for grammar errors that can
/// name the offending input line, -1 otherwise.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}
    Error(Errc code, long line_no, std::string message)
        : std::runtime_error(std::string(errc_name(code)) + " at line " +
                             std::to_string(line_no) + ": " + message),
          code_(code), line_(line_no) {}

    Errc code() const noexcept { return code_; }
    long line() const noexcept { return line_; }

private:
    Errc code_;
    long line_ = -1;
};

} // namespace recomp
