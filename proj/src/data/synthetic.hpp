#pragma once

#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace litetok {

enum class Motif { MovingSquare, TranslatingGradient, BlinkingNoise };

std::string motif_to_string(Motif m);
Motif motif_from_string(const std::string& s);

struct SyntheticVideoSpec {
    int64_t num_videos = 8;
    int64_t frames = 32;
    int64_t px = 32;
    Motif motif = Motif::MovingSquare;
    int64_t motion_px_per_frame = 2;
    uint64_t seed = 42;
    double native_fps = 4.0;

    void validate() const;
};

// One deterministic video; adjacent frames differ only by the motif's motion.
TensorPtr generate_video(const SyntheticVideoSpec& spec, int64_t video_index);

std::vector<TensorPtr> generate_corpus(const SyntheticVideoSpec& spec);

// LTF1 clip files plus a plain-text manifest listing shapes and the seed.
void write_corpus(const SyntheticVideoSpec& spec, const std::string& out_dir);

struct LoadedCorpus {
    std::vector<TensorPtr> videos;
    SyntheticVideoSpec spec;
};

LoadedCorpus load_corpus(const std::string& dir);

}  // namespace litetok
