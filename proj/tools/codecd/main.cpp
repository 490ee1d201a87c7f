// recomp-codecd: the external H.264 codec driver for the recomp toolkit.
//
// All video decoding/encoding in the toolkit happens inside this process;
// the library spawns it per operation. Subcommands:
//   version              tool + libavcodec identity string
//   probe <in>           key=value stream info, frames counted by decoding
//   encode <in> <out>    re-encode to H.264 at a constant quality scale
//   mbdump <in>          per-frame macroblock-type matrices on stdout
//   mvdump <in>          per-block motion-vector CSV on stdout
//   synth <out>          seeded procedural clip, encoded once
//
// Failures print "error: <code>: <detail>" to stderr and exit nonzero.

#include <algorithm>
#include <utility>
#include <cinttypes>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <memory>
#include <string>
#include <vector>

extern "C" {
#include <libavcodec/avcodec.h>
#include <libavformat/avformat.h>
#include <libavutil/imgutils.h>
#include <libavutil/motion_vector.h>
#include <libavutil/opt.h>
#include <libavutil/pixdesc.h>
#include <libswscale/swscale.h>
}

#include <CLI11.hpp>

namespace {

constexpr const char* kToolName = "recomp-codecd";
constexpr const char* kToolVersion = "0.1.0";

[[noreturn]] void die(const char* code, const std::string& detail) {
    fprintf(stderr, "error: %s: %s\n", code, detail.c_str());
    exit(1);
}

std::string averr(int rc) {
    char buf[AV_ERROR_MAX_STRING_SIZE] = {};
    av_strerror(rc, buf, sizeof buf);
    return buf;
}

template <auto FreeFn> struct AvDeleter {
    template <class T> void operator()(T* p) const {
        if (p) FreeFn(&p);
    }
};
using FormatInPtr = std::unique_ptr<AVFormatContext, AvDeleter<&avformat_close_input>>;
using CodecCtxPtr = std::unique_ptr<AVCodecContext, AvDeleter<&avcodec_free_context>>;
using FramePtr = std::unique_ptr<AVFrame, AvDeleter<&av_frame_free>>;
using PacketPtr = std::unique_ptr<AVPacket, AvDeleter<&av_packet_free>>;

// ---------------------------------------------------------------------------
// decoding

struct Decoder {
    FormatInPtr fmt;
    CodecCtxPtr ctx;
    int stream_index = -1;
    double fps = 0.0;

    static Decoder open(const std::string& path, bool export_mvs, int debug_flags) {
        if (FILE* f = fopen(path.c_str(), "rb")) fclose(f);
        else die("file_not_found", path);

        AVFormatContext* raw = nullptr;
        int rc = avformat_open_input(&raw, path.c_str(), nullptr, nullptr);
        if (rc < 0) die("not_a_video", path + ": " + averr(rc));
        Decoder d;
        d.fmt.reset(raw);
        if (avformat_find_stream_info(raw, nullptr) < 0)
            die("not_a_video", path + ": no stream info");
        d.stream_index = av_find_best_stream(raw, AVMEDIA_TYPE_VIDEO, -1, -1, nullptr, 0);
        if (d.stream_index < 0) die("not_a_video", path + ": no video stream");
        AVStream* st = raw->streams[d.stream_index];
        if (st->codecpar->codec_id != AV_CODEC_ID_H264)
            die("unsupported_codec",
                path + ": stream is " + avcodec_get_name(st->codecpar->codec_id));
        const AVCodec* dec = avcodec_find_decoder(st->codecpar->codec_id);
        if (!dec) die("decoder_failure", "no h264 decoder built in");
        d.ctx.reset(avcodec_alloc_context3(dec));
        avcodec_parameters_to_context(d.ctx.get(), st->codecpar);
        d.ctx->thread_count = 1; // ordered debug output, reproducible runs
        d.ctx->debug = debug_flags;
        AVDictionary* opts = nullptr;
        if (export_mvs) av_dict_set(&opts, "flags2", "+export_mvs", 0);
        rc = avcodec_open2(d.ctx.get(), dec, &opts);
        av_dict_free(&opts);
        if (rc < 0) die("decoder_failure", path + ": " + averr(rc));
        AVRational fr = av_guess_frame_rate(raw, st, nullptr);
        d.fps = fr.num > 0 && fr.den > 0 ? av_q2d(fr) : 0.0;
        return d;
    }

    // Decode every frame in output order; returns the frame count.
    long for_each_frame(const std::function<void(AVFrame*)>& fn) {
        PacketPtr pkt(av_packet_alloc());
        FramePtr frame(av_frame_alloc());
        long count = 0;
        auto drain = [&]() {
            while (avcodec_receive_frame(ctx.get(), frame.get()) == 0) {
                fn(frame.get());
                ++count;
                av_frame_unref(frame.get());
            }
        };
        while (av_read_frame(fmt.get(), pkt.get()) >= 0) {
            if (pkt->stream_index == stream_index) {
                int rc = avcodec_send_packet(ctx.get(), pkt.get());
                if (rc < 0 && rc != AVERROR(EAGAIN))
                    die("decoder_failure", "send_packet: " + averr(rc));
                drain();
            }
            av_packet_unref(pkt.get());
        }
        avcodec_send_packet(ctx.get(), nullptr);
        drain();
        return count;
    }
};

// ---------------------------------------------------------------------------
// encoding

struct EncodeSettings {
    int crf = 23;
    int gop = 12;
    int bframes = 2;
    std::string preset = "medium";
};

struct Encoder {
    AVFormatContext* oc = nullptr;
    CodecCtxPtr ctx;
    AVStream* stream = nullptr;
    long packets = 0;

    Encoder() = default;
    Encoder(Encoder&& o) noexcept
        : oc(std::exchange(o.oc, nullptr)), ctx(std::move(o.ctx)), stream(o.stream),
          packets(o.packets) {}
    Encoder& operator=(Encoder&&) = delete;
    Encoder(const Encoder&) = delete;

    static Encoder open(const std::string& path, int width, int height, int fps,
                        const EncodeSettings& s) {
        const AVCodec* codec = avcodec_find_encoder_by_name("libx264");
        if (!codec) die("encoder_failure", "libx264 encoder not available");
        Encoder e;
        int rc = avformat_alloc_output_context2(&e.oc, nullptr, "mp4", path.c_str());
        if (rc < 0 || !e.oc) die("encoder_failure", "output context: " + averr(rc));
        e.stream = avformat_new_stream(e.oc, nullptr);
        e.ctx.reset(avcodec_alloc_context3(codec));
        AVCodecContext* c = e.ctx.get();
        c->width = width;
        c->height = height;
        c->pix_fmt = AV_PIX_FMT_YUV420P;
        c->time_base = {1, fps};
        c->gop_size = s.gop;
        c->max_b_frames = s.bframes;
        c->thread_count = 1; // bit-reproducible output
        c->flags |= AV_CODEC_FLAG_BITEXACT;
        if (e.oc->oformat->flags & AVFMT_GLOBALHEADER) c->flags |= AV_CODEC_FLAG_GLOBAL_HEADER;
        av_opt_set(c->priv_data, "preset", s.preset.c_str(), 0);
        av_opt_set_double(c->priv_data, "crf", s.crf, 0);
        // rigid GOP: no scene-cut keyframes, so frame types line up across
        // the generations of a ladder
        av_opt_set(c->priv_data, "x264-params", "scenecut=0:b-adapt=0", 0);
        rc = avcodec_open2(c, codec, nullptr);
        if (rc < 0) die("encoder_failure", "open: " + averr(rc));
        avcodec_parameters_from_context(e.stream->codecpar, c);
        e.stream->time_base = c->time_base;
        e.oc->flags |= AVFMT_FLAG_BITEXACT;
        rc = avio_open(&e.oc->pb, path.c_str(), AVIO_FLAG_WRITE);
        if (rc < 0) die("encoder_failure", path + ": " + averr(rc));
        rc = avformat_write_header(e.oc, nullptr);
        if (rc < 0) die("encoder_failure", "write header: " + averr(rc));
        return e;
    }

    void drain_packets() {
        PacketPtr pkt(av_packet_alloc());
        while (avcodec_receive_packet(ctx.get(), pkt.get()) == 0) {
            av_packet_rescale_ts(pkt.get(), ctx->time_base, stream->time_base);
            pkt->stream_index = stream->index;
            if (av_interleaved_write_frame(oc, pkt.get()) < 0)
                die("encoder_failure", "write frame");
            ++packets;
        }
    }

    void push(AVFrame* frame) {
        int rc = avcodec_send_frame(ctx.get(), frame);
        if (rc < 0) die("encoder_failure", "send_frame: " + averr(rc));
        drain_packets();
    }

    long finish() {
        push(nullptr);
        if (av_write_trailer(oc) < 0) die("encoder_failure", "write trailer");
        avio_closep(&oc->pb);
        return packets;
    }

    ~Encoder() {
        if (oc) {
            if (oc->pb) avio_closep(&oc->pb);
            avformat_free_context(oc);
        }
    }
};

// ---------------------------------------------------------------------------
// subcommands

int cmd_version() {
    printf("%s %s (lavc %s; lavf %d.%d.%d)\n", kToolName, kToolVersion, av_version_info(),
           LIBAVFORMAT_VERSION_MAJOR, LIBAVFORMAT_VERSION_MINOR, LIBAVFORMAT_VERSION_MICRO);
    return 0;
}

int cmd_probe(const std::string& path) {
    Decoder d = Decoder::open(path, false, 0);
    int width = 0, height = 0;
    long frames = d.for_each_frame([&](AVFrame* f) {
        if (width == 0) { width = f->width; height = f->height; }
    });
    if (frames == 0) die("not_a_video", path + ": no decodable frames");
    printf("width=%d\nheight=%d\nframes=%ld\nfps=%.6f\ncodec=h264\n", width, height, frames,
           d.fps);
    return 0;
}

int cmd_encode(const std::string& in, const std::string& out, const EncodeSettings& s) {
    Decoder d = Decoder::open(in, false, 0);
    AVStream* st = d.fmt->streams[d.stream_index];
    const int width = st->codecpar->width;
    const int height = st->codecpar->height;
    const int fps = d.fps > 0 ? static_cast<int>(d.fps + 0.5) : 30;

    Encoder enc = Encoder::open(out, width, height, fps, s);
    SwsContext* sws = nullptr;
    FramePtr yuv(av_frame_alloc());
    long in_frames = 0;
    d.for_each_frame([&](AVFrame* f) {
        AVFrame* src = f;
        if (f->format != AV_PIX_FMT_YUV420P) {
            if (!sws) {
                sws = sws_getContext(f->width, f->height, static_cast<AVPixelFormat>(f->format),
                                     width, height, AV_PIX_FMT_YUV420P, SWS_BILINEAR, nullptr,
                                     nullptr, nullptr);
                if (!sws) die("encoder_failure", "cannot convert pixel format");
                yuv->format = AV_PIX_FMT_YUV420P;
                yuv->width = width;
                yuv->height = height;
                av_frame_get_buffer(yuv.get(), 0);
            }
            sws_scale(sws, f->data, f->linesize, 0, f->height, yuv->data, yuv->linesize);
            src = yuv.get();
        }
        src->pts = in_frames;
        src->pict_type = AV_PICTURE_TYPE_NONE; // encoder chooses the GOP structure
        enc.push(src);
        ++in_frames;
    });
    long out_frames = enc.finish();
    if (sws) sws_freeContext(sws);
    printf("in_frames=%ld\nout_frames=%ld\n", in_frames, out_frames);
    return 0;
}

// Captures the decoder's debug log, keeps only the macroblock matrices.
struct MbDebugCapture {
    std::string linebuf;
    int rows_left = 0;
    int mb_width = 0, mb_height = 0;
    long frames = 0;
    bool bad_row = false;

    static MbDebugCapture* instance;

    static void log_cb(void* avcl, int level, const char* fmt, va_list vl) {
        if (level > AV_LOG_DEBUG || !instance) return;
        char buf[8192];
        vsnprintf(buf, sizeof buf, fmt, vl);
        instance->feed(buf);
        (void)avcl;
    }

    void feed(const char* text) {
        for (const char* p = text; *p; ++p) {
            if (*p == '\n') {
                line_done();
                linebuf.clear();
            } else {
                linebuf.push_back(*p);
            }
        }
    }

    void line_done() {
        constexpr std::string_view kHeader = "New frame, type: ";
        if (rows_left > 0) {
            // inside a matrix: rows arrive back to back from the decoder
            const size_t want = static_cast<size_t>(mb_width) * 3;
            if (linebuf.size() > want || linebuf.size() + 2 < want) {
                bad_row = true;
                rows_left = 0;
                return;
            }
            fwrite(linebuf.data(), 1, linebuf.size(), stdout);
            fputc('\n', stdout);
            --rows_left;
            return;
        }
        if (linebuf.starts_with(kHeader) && linebuf.size() == kHeader.size() + 1) {
            fwrite(linebuf.data(), 1, linebuf.size(), stdout);
            fputc('\n', stdout);
            rows_left = mb_height;
            ++frames;
        }
    }
};

MbDebugCapture* MbDebugCapture::instance = nullptr;

int cmd_mbdump(const std::string& path) {
    Decoder d = Decoder::open(path, false, FF_DEBUG_MB_TYPE);
    MbDebugCapture cap;
    cap.mb_width = (d.ctx->width + 15) / 16;
    cap.mb_height = (d.ctx->height + 15) / 16;
    MbDebugCapture::instance = &cap;
    av_log_set_level(AV_LOG_DEBUG);
    av_log_set_callback(MbDebugCapture::log_cb);
    d.for_each_frame([](AVFrame*) {});
    av_log_set_callback(av_log_default_callback);
    av_log_set_level(AV_LOG_INFO);
    MbDebugCapture::instance = nullptr;
    fflush(stdout);
    if (cap.bad_row) die("decoder_failure", "malformed macroblock matrix row");
    if (cap.frames == 0)
        die("empty_debug_output", path + ": decoder emitted no macroblock matrices");
    return 0;
}

int cmd_mvdump(const std::string& path) {
    Decoder d = Decoder::open(path, true, 0);
    printf("framenum,source,blockw,blockh,srcx,srcy,dstx,dsty,flags,motion_x,motion_y,motion_scale\n");
    long index = 0;
    d.for_each_frame([&](AVFrame* f) {
        if (AVFrameSideData* sd = av_frame_get_side_data(f, AV_FRAME_DATA_MOTION_VECTORS)) {
            const auto* mvs = reinterpret_cast<const AVMotionVector*>(sd->data);
            const size_t n = sd->size / sizeof(AVMotionVector);
            for (size_t i = 0; i < n; ++i) {
                const AVMotionVector& mv = mvs[i];
                printf("%ld,%d,%d,%d,%d,%d,%d,%d,%" PRIu64 ",%d,%d,%d\n", index, mv.source,
                       mv.w, mv.h, mv.src_x, mv.src_y, mv.dst_x, mv.dst_y, mv.flags,
                       mv.motion_x, mv.motion_y, mv.motion_scale);
            }
        }
        ++index;
    });
    fflush(stdout);
    return 0;
}

// ---------------------------------------------------------------------------
// procedural clip synthesis

struct Xorshift {
    uint64_t s;
    explicit Xorshift(uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    uint32_t next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return static_cast<uint32_t>(s >> 32);
    }
    int range(int lo, int hi) { return lo + static_cast<int>(next() % (hi - lo + 1)); }
};

struct MovingBox {
    int x, y, w, h, vx, vy;
    uint8_t luma, cb, cr;
};

// Smoothed value-noise texture: random lattice, bilinear interpolation,
// plus fine-grained dither so every macroblock has high-frequency detail.
std::vector<uint8_t> make_texture(Xorshift& rng, int width, int height, int cell, int base,
                                  int range) {
    const int gw = width / cell + 2, gh = height / cell + 2;
    std::vector<int> lattice(static_cast<size_t>(gw) * gh);
    for (auto& v : lattice) v = base + static_cast<int>(rng.next() % range);
    std::vector<uint8_t> tex(static_cast<size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        const int gy = y / cell, fy = y % cell;
        for (int x = 0; x < width; ++x) {
            const int gx = x / cell, fx = x % cell;
            const int a = lattice[gy * gw + gx], b = lattice[gy * gw + gx + 1];
            const int c = lattice[(gy + 1) * gw + gx], d = lattice[(gy + 1) * gw + gx + 1];
            const int top = a * (cell - fx) + b * fx;
            const int bot = c * (cell - fx) + d * fx;
            int v = (top * (cell - fy) + bot * fy) / (cell * cell);
            v += static_cast<int>(rng.next() % 25) - 12; // per-pixel detail
            tex[static_cast<size_t>(y) * width + x] =
                static_cast<uint8_t>(std::clamp(v, 16, 235));
        }
    }
    return tex;
}

int cmd_synth(const std::string& out, int width, int height, int frames, int fps, uint64_t seed,
              const EncodeSettings& s) {
    if (width < 64 || height < 64 || width % 2 || height % 2)
        die("encoder_failure", "synth needs even dimensions >= 64x64");
    Encoder enc = Encoder::open(out, width, height, fps, s);

    Xorshift rng(seed);
    // panning textured background: every macroblock carries motion and detail
    std::vector<uint8_t> bg = make_texture(rng, width, height, 16, 48, 144);
    const int pan_vx = rng.next() % 2 ? 2 : -2;
    const int pan_vy = rng.next() % 2 ? 1 : -1;

    // a fixed population of textured moving boxes; geometry and speed
    // magnitudes are identical for every clip so corpora stay statistically
    // homogeneous, only positions, directions and shades vary with the seed
    const int min_dim = std::min(width, height);
    const int box_sizes[4] = {min_dim / 4, min_dim / 5, min_dim / 4, min_dim / 6};
    const int box_speeds[4][2] = {{2, 1}, {1, 2}, {3, 1}, {2, 2}};
    std::vector<MovingBox> boxes;
    std::vector<std::vector<uint8_t>> box_tex;
    for (int i = 0; i < 4; ++i) {
        MovingBox b;
        b.w = box_sizes[i];
        b.h = box_sizes[i];
        b.x = rng.range(0, width - b.w - 1);
        b.y = rng.range(0, height - b.h - 1);
        b.vx = rng.next() % 2 ? box_speeds[i][0] : -box_speeds[i][0];
        b.vy = rng.next() % 2 ? box_speeds[i][1] : -box_speeds[i][1];
        b.luma = static_cast<uint8_t>(rng.range(50, 200));
        b.cb = static_cast<uint8_t>(rng.range(100, 156));
        b.cr = static_cast<uint8_t>(rng.range(100, 156));
        boxes.push_back(b);
        box_tex.push_back(make_texture(rng, b.w, b.h, 8, b.luma - 24, 48));
    }

    FramePtr frame(av_frame_alloc());
    frame->format = AV_PIX_FMT_YUV420P;
    frame->width = width;
    frame->height = height;
    if (av_frame_get_buffer(frame.get(), 0) < 0) die("encoder_failure", "frame alloc");

    for (int i = 0; i < frames; ++i) {
        av_frame_make_writable(frame.get());
        uint8_t* Y = frame->data[0];
        uint8_t* U = frame->data[1];
        uint8_t* V = frame->data[2];
        const int ox = ((pan_vx * i) % width + width) % width;
        const int oy = ((pan_vy * i) % height + height) % height;
        for (int y = 0; y < height; ++y) {
            const uint8_t* src = bg.data() + static_cast<size_t>((y + oy) % height) * width;
            uint8_t* dst = Y + static_cast<size_t>(y) * frame->linesize[0];
            const int first = width - ox;
            memcpy(dst, src + ox, first);
            memcpy(dst + first, src, ox);
        }
        for (int y = 0; y < height / 2; ++y) {
            memset(U + y * frame->linesize[1], 128, width / 2);
            memset(V + y * frame->linesize[2], 128, width / 2);
        }
        for (size_t bi = 0; bi < boxes.size(); ++bi) {
            const MovingBox& b = boxes[bi];
            for (int y = 0; y < b.h; ++y)
                memcpy(Y + (b.y + y) * frame->linesize[0] + b.x,
                       box_tex[bi].data() + static_cast<size_t>(y) * b.w, b.w);
            for (int y = b.y / 2; y < (b.y + b.h) / 2; ++y) {
                memset(U + y * frame->linesize[1] + b.x / 2, b.cb, b.w / 2);
                memset(V + y * frame->linesize[2] + b.x / 2, b.cr, b.w / 2);
            }
        }
        // light temporal grain so consecutive frames never repeat exactly
        Xorshift grain(seed * 1000003ULL + static_cast<uint64_t>(i) + 1);
        const int ngrain = width * height / 64;
        for (int g = 0; g < ngrain; ++g) {
            const uint32_t r = grain.next();
            const int gx = static_cast<int>(r % width);
            const int gy = static_cast<int>((r >> 12) % height);
            uint8_t& px = Y[gy * frame->linesize[0] + gx];
            px = static_cast<uint8_t>(std::clamp(px + static_cast<int>(grain.next() % 9) - 4,
                                                 16, 235));
        }
        for (MovingBox& b : boxes) {
            b.x += b.vx;
            b.y += b.vy;
            if (b.x < 0) { b.x = -b.x; b.vx = -b.vx; }
            if (b.y < 0) { b.y = -b.y; b.vy = -b.vy; }
            if (b.x + b.w >= width) { b.x = 2 * (width - b.w) - b.x - 1; b.vx = -b.vx; }
            if (b.y + b.h >= height) { b.y = 2 * (height - b.h) - b.y - 1; b.vy = -b.vy; }
        }
        frame->pts = i;
        enc.push(frame.get());
    }
    long out_frames = enc.finish();
    printf("frames=%ld\n", out_frames);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    av_log_set_level(AV_LOG_ERROR);

    CLI::App app{"recomp H.264 codec driver"};
    app.require_subcommand(1);

    auto* version = app.add_subcommand("version", "print tool identity");

    std::string in_path, out_path;
    auto* probe = app.add_subcommand("probe", "decode-count stream info");
    probe->add_option("input", in_path)->required();

    EncodeSettings settings;
    auto add_encode_opts = [&settings](CLI::App* cmd) {
        cmd->add_option("--crf", settings.crf)->check(CLI::Range(0, 51));
        cmd->add_option("--gop", settings.gop)->check(CLI::PositiveNumber);
        cmd->add_option("--bframes", settings.bframes)->check(CLI::Range(0, 8));
        cmd->add_option("--preset", settings.preset);
    };

    auto* encode = app.add_subcommand("encode", "re-encode at a constant quality scale");
    encode->add_option("input", in_path)->required();
    encode->add_option("output", out_path)->required();
    add_encode_opts(encode);

    auto* mbdump = app.add_subcommand("mbdump", "macroblock-type matrices to stdout");
    mbdump->add_option("input", in_path)->required();

    auto* mvdump = app.add_subcommand("mvdump", "motion-vector records to stdout");
    mvdump->add_option("input", in_path)->required();

    int width = 320, height = 240, frames = 60, fps = 30;
    uint64_t seed = 1;
    auto* synth = app.add_subcommand("synth", "generate a seeded procedural clip");
    synth->add_option("output", out_path)->required();
    synth->add_option("--width", width)->check(CLI::PositiveNumber);
    synth->add_option("--height", height)->check(CLI::PositiveNumber);
    synth->add_option("--frames", frames)->check(CLI::PositiveNumber);
    synth->add_option("--fps", fps)->check(CLI::PositiveNumber);
    synth->add_option("--seed", seed);
    add_encode_opts(synth);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        fprintf(stderr, "error: usage: %s\n", e.what());
        return 2;
    }

    if (version->parsed()) return cmd_version();
    if (probe->parsed()) return cmd_probe(in_path);
    if (encode->parsed()) return cmd_encode(in_path, out_path, settings);
    if (mbdump->parsed()) return cmd_mbdump(in_path);
    if (mvdump->parsed()) return cmd_mvdump(in_path);
    if (synth->parsed()) return cmd_synth(out_path, width, height, frames, fps, seed, settings);
    return 2;
}
