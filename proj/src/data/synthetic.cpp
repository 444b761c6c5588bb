#include "data/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "core/ltf.hpp"

namespace litetok {

std::string motif_to_string(Motif m) {
    switch (m) {
        case Motif::MovingSquare: return "moving_square";
        case Motif::TranslatingGradient: return "translating_gradient";
        case Motif::BlinkingNoise: return "blinking_noise";
    }
    return "?";
}

Motif motif_from_string(const std::string& s) {
    if (s == "moving_square") return Motif::MovingSquare;
    if (s == "translating_gradient") return Motif::TranslatingGradient;
    if (s == "blinking_noise") return Motif::BlinkingNoise;
    throw ConfigError("unknown motif '" + s + "'");
}

void SyntheticVideoSpec::validate() const {
    if (num_videos < 1 || frames < 1 || px < 1) throw ConfigError("synthetic spec: extents must be positive");
    if (motion_px_per_frame < 0) throw ConfigError("synthetic spec: motion must be non-negative");
    if (native_fps <= 0) throw ConfigError("synthetic spec: native_fps must be positive");
}

namespace {

void paint_moving_square(Tensor& video, const SyntheticVideoSpec& spec, Rng& rng) {
    int64_t F = spec.frames, px = spec.px;
    int64_t side = std::max<int64_t>(2, px / 4);
    int64_t x0 = rng.uniform_int(0, px - 1);
    int64_t y0 = rng.uniform_int(0, px - 1);
    float r = static_cast<float>(rng.uniform(0.6, 1.0));
    float g = static_cast<float>(rng.uniform(0.6, 1.0));
    float b = static_cast<float>(rng.uniform(0.6, 1.0));
    for (int64_t f = 0; f < F; ++f) {
        // textured static background so frame correlation is well defined
        for (int64_t y = 0; y < px; ++y)
            for (int64_t x = 0; x < px; ++x) {
                float* p = &video.data[((f * px + y) * px + x) * 3];
                float bg = 0.15f + 0.2f * static_cast<float>(x) / px + 0.1f * static_cast<float>(y) / px;
                p[0] = bg;
                p[1] = bg * 0.9f;
                p[2] = bg * 1.1f;
            }
        int64_t sx = (x0 + f * spec.motion_px_per_frame) % px;
        int64_t sy = (y0 + f * (spec.motion_px_per_frame / 2)) % px;
        for (int64_t dy = 0; dy < side; ++dy)
            for (int64_t dx = 0; dx < side; ++dx) {
                int64_t y = (sy + dy) % px;  // torus wrap keeps motion uniform
                int64_t x = (sx + dx) % px;
                float* p = &video.data[((f * px + y) * px + x) * 3];
                p[0] = r;
                p[1] = g;
                p[2] = b;
            }
    }
}

void paint_translating_gradient(Tensor& video, const SyntheticVideoSpec& spec, Rng& rng) {
    int64_t F = spec.frames, px = spec.px;
    double phase0 = rng.uniform(0.0, static_cast<double>(px));
    for (int64_t f = 0; f < F; ++f)
        for (int64_t y = 0; y < px; ++y)
            for (int64_t x = 0; x < px; ++x) {
                float* p = &video.data[((f * px + y) * px + x) * 3];
                double s = std::fmod(phase0 + x + y + static_cast<double>(f * spec.motion_px_per_frame),
                                     static_cast<double>(px)) /
                           px;
                p[0] = static_cast<float>(s);
                p[1] = static_cast<float>(1.0 - s);
                p[2] = static_cast<float>(0.5 + 0.5 * std::sin(2.0 * M_PI * s));
            }
}

void paint_blinking_noise(Tensor& video, const SyntheticVideoSpec& spec, Rng& rng) {
    int64_t F = spec.frames, px = spec.px;
    std::vector<float> base(static_cast<size_t>(px * px * 3));
    for (auto& v : base) v = static_cast<float>(rng.next_double());
    for (int64_t f = 0; f < F; ++f) {
        float* frame = &video.data[f * px * px * 3];
        std::copy(base.begin(), base.end(), frame);
        if (f > 0) {
            // a tenth of the pixels re-randomize each frame ("blinking")
            int64_t n_blink = px * px / 10;
            for (int64_t k = 0; k < n_blink; ++k) {
                int64_t pix = rng.uniform_int(0, px * px - 1);
                for (int64_t c = 0; c < 3; ++c) {
                    float v = static_cast<float>(rng.next_double());
                    frame[pix * 3 + c] = v;
                    base[pix * 3 + c] = v;
                }
            }
        }
    }
}

}  // namespace

TensorPtr generate_video(const SyntheticVideoSpec& spec, int64_t video_index) {
    spec.validate();
    Rng rng = Rng(spec.seed).split(static_cast<uint64_t>(video_index));
    auto video = make_tensor({spec.frames, spec.px, spec.px, 3});
    switch (spec.motif) {
        case Motif::MovingSquare: paint_moving_square(*video, spec, rng); break;
        case Motif::TranslatingGradient: paint_translating_gradient(*video, spec, rng); break;
        case Motif::BlinkingNoise: paint_blinking_noise(*video, spec, rng); break;
    }
    return video;
}

std::vector<TensorPtr> generate_corpus(const SyntheticVideoSpec& spec) {
    std::vector<TensorPtr> out;
    out.reserve(static_cast<size_t>(spec.num_videos));
    for (int64_t i = 0; i < spec.num_videos; ++i) out.push_back(generate_video(spec, i));
    return out;
}

void write_corpus(const SyntheticVideoSpec& spec, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream manifest(fs::path(out_dir) / "manifest.txt");
    if (!manifest) throw IoError("cannot write corpus manifest in " + out_dir);
    manifest << "num_videos=" << spec.num_videos << "\n";
    manifest << "frames=" << spec.frames << "\n";
    manifest << "px=" << spec.px << "\n";
    manifest << "motif=" << motif_to_string(spec.motif) << "\n";
    manifest << "motion_px_per_frame=" << spec.motion_px_per_frame << "\n";
    manifest << "seed=" << spec.seed << "\n";
    manifest << "native_fps=" << spec.native_fps << "\n";
    for (int64_t i = 0; i < spec.num_videos; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "video_%03d.ltf", static_cast<int>(i));
        TensorPtr v = generate_video(spec, i);
        ltf_write((fs::path(out_dir) / name).string(), *v);
        manifest << "video=" << name << "\n";
    }
    if (!manifest) throw IoError("corpus manifest write failed in " + out_dir);
}

LoadedCorpus load_corpus(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream manifest(fs::path(dir) / "manifest.txt");
    if (!manifest) throw IoError("cannot read corpus manifest in " + dir);
    LoadedCorpus out;
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("bad corpus manifest line: " + line);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "video")
            out.videos.push_back(ltf_read_ptr((fs::path(dir) / val).string()));
        else
            kv[key] = val;
    }
    out.spec.num_videos = std::stoll(kv.at("num_videos"));
    out.spec.frames = std::stoll(kv.at("frames"));
    out.spec.px = std::stoll(kv.at("px"));
    out.spec.motif = motif_from_string(kv.at("motif"));
    out.spec.motion_px_per_frame = std::stoll(kv.at("motion_px_per_frame"));
    out.spec.seed = std::stoull(kv.at("seed"));
    out.spec.native_fps = std::stod(kv.at("native_fps"));
    if (static_cast<int64_t>(out.videos.size()) != out.spec.num_videos)
        throw IoError("corpus manifest lists " + std::to_string(out.spec.num_videos) + " videos, found " +
                      std::to_string(out.videos.size()));
    return out;
}

}  // namespace litetok
