#pragma once

#include <optional>
#include <string>

#include "cost/costmodel.hpp"
#include "data/synthetic.hpp"
#include "distill/distill.hpp"
#include "io/config.hpp"

namespace litetok {

// Fully resolved distillation run: [data], [teacher], [student], [train].
struct RunConfig {
    SyntheticVideoSpec data;
    std::string data_dir;  // load instead of generating when non-empty
    EncoderSpec teacher;
    uint64_t teacher_seed = 7;
    EncoderSpec student;
    uint64_t student_seed = 11;
    std::string student_init = "auto";  // auto | teacher | random
    TrainConfig train;
    std::string run_dir = "run";
    int64_t checkpoint_every = 0;  // 0: final checkpoint only

    std::string echo() const;  // resolved key=value dump, run.cfg format
};

RunConfig resolve_run_config(const Config& cfg);

struct ProfileConfig {
    std::vector<int64_t> frames;
    std::vector<std::string> strategies;  // none | posthoc | internal
    int64_t r = 16;
    int64_t tokens_per_frame = 256;  // LLM-side tokens per frame
    ArchSpec vision;
    ArchSpec student;
    LLMSpec llm;
    bool measure = false;
    std::string measure_component = "desk";  // desk | stub
    int warmup = 40;
    int iters = 100;
    std::string output;  // empty: stdout
};

ProfileConfig resolve_profile_config(const Config& cfg);

// gen-data: write a synthetic corpus directory
void run_gen_data(const std::string& cfg_path, const std::string& out_dir);

// distill: full training run, writes run_dir/{run.cfg,log.csv,checkpoint*/}
void run_distill(const std::string& cfg_path);

// profile: cost-model CSV, optionally with measured desk-scale latencies
void run_profile(const std::string& cfg_path, const std::string& output_override);

std::string profile_csv(const ProfileConfig& pc);
std::string training_log_csv(const std::vector<TrainLogRow>& log);

// LITETOK_SEED environment override applied to every seed in the config
std::optional<uint64_t> env_seed_override();

}  // namespace litetok
