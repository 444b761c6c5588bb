#include "pipeline/run.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace litetok {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

EncoderSpec resolve_encoder_section(const Config& cfg, const std::string& section, Role role) {
    EncoderSpec base = role == Role::Teacher ? desk_teacher_spec() : desk_student_spec();
    std::set<std::string> known = {"num_layers", "dim", "heads", "patch", "input_px", "seed"};
    if (role == Role::Student) {
        known.insert({"temporal_kernel", "temporal_mixing", "stride_schedule", "distill_proj_dim", "init"});
    }
    cfg.require_known_keys(section, known);
    EncoderSpec s = base;
    s.num_layers = static_cast<int>(cfg.get_int(section, "num_layers", base.num_layers));
    s.dim = static_cast<int>(cfg.get_int(section, "dim", base.dim));
    s.heads = static_cast<int>(cfg.get_int(section, "heads", base.heads));
    s.patch = static_cast<int>(cfg.get_int(section, "patch", base.patch));
    s.input_px = static_cast<int>(cfg.get_int(section, "input_px", base.input_px));
    if (role == Role::Student) {
        s.temporal_kernel = static_cast<int>(cfg.get_int(section, "temporal_kernel", base.temporal_kernel));
        s.temporal_mixing = cfg.get_bool(section, "temporal_mixing", base.temporal_mixing);
        s.stride_schedule = parse_stride_schedule(
            cfg.get_str(section, "stride_schedule", stride_schedule_to_string(base.stride_schedule)));
        s.distill_proj_dim = static_cast<int>(cfg.get_int(section, "distill_proj_dim", base.distill_proj_dim));
    }
    s.validate();
    return s;
}

}  // namespace

std::optional<uint64_t> env_seed_override() {
    const char* v = std::getenv("LITETOK_SEED");
    if (!v || !*v) return std::nullopt;
    try {
        size_t pos = 0;
        uint64_t seed = std::stoull(v, &pos);
        if (pos != std::string(v).size()) throw std::invalid_argument(v);
        return seed;
    } catch (const std::exception&) {
        throw ConfigError(std::string("LITETOK_SEED is not an unsigned integer: '") + v + "'");
    }
}

RunConfig resolve_run_config(const Config& cfg) {
    RunConfig rc;
    cfg.require_known_keys("data", {"num_videos", "frames", "px", "motif", "motion_px_per_frame",
                                    "seed", "native_fps"});
    rc.data.num_videos = cfg.get_int("data", "num_videos", rc.data.num_videos);
    rc.data.frames = cfg.get_int("data", "frames", rc.data.frames);
    rc.data.px = cfg.get_int("data", "px", rc.data.px);
    rc.data.motif = motif_from_string(cfg.get_str("data", "motif", motif_to_string(rc.data.motif)));
    rc.data.motion_px_per_frame = cfg.get_int("data", "motion_px_per_frame", rc.data.motion_px_per_frame);
    rc.data.seed = cfg.get_u64("data", "seed", rc.data.seed);
    rc.data.native_fps = cfg.get_double("data", "native_fps", rc.data.native_fps);
    rc.data.validate();

    rc.teacher = resolve_encoder_section(cfg, "teacher", Role::Teacher);
    rc.teacher_seed = cfg.get_u64("teacher", "seed", rc.teacher_seed);
    rc.student = resolve_encoder_section(cfg, "student", Role::Student);
    rc.student_seed = cfg.get_u64("student", "seed", rc.student_seed);
    rc.student_init = cfg.get_str("student", "init", rc.student_init);
    if (rc.student_init != "auto" && rc.student_init != "teacher" && rc.student_init != "random")
        throw ConfigError("[student] init must be auto, teacher or random");

    cfg.require_known_keys("train", {"objective", "peak_lr", "warmup_steps", "total_steps", "batch_size",
                                     "weight_decay", "grad_clip_norm", "outlier_sigma", "seed",
                                     "clip_frames", "fps_min", "fps_max", "run_dir", "checkpoint_every",
                                     "data_dir"});
    std::string obj = cfg.get_str("train", "objective", "ctd");
    if (obj == "ctd")
        rc.train.objective = Objective::Ctd;
    else if (obj == "rtd")
        rc.train.objective = Objective::Rtd;
    else
        throw ConfigError("[train] objective must be ctd or rtd, got '" + obj + "'");
    rc.train.peak_lr = cfg.get_double("train", "peak_lr", rc.train.peak_lr);
    rc.train.warmup_steps = cfg.get_int("train", "warmup_steps", rc.train.warmup_steps);
    rc.train.total_steps = cfg.get_int("train", "total_steps", rc.train.total_steps);
    rc.train.batch_size = cfg.get_int("train", "batch_size", rc.train.batch_size);
    rc.train.weight_decay = cfg.get_double("train", "weight_decay", rc.train.weight_decay);
    rc.train.grad_clip_norm = cfg.get_double("train", "grad_clip_norm", rc.train.grad_clip_norm);
    rc.train.outlier_sigma = cfg.get_double("train", "outlier_sigma", rc.train.outlier_sigma);
    rc.train.seed = cfg.get_u64("train", "seed", rc.train.seed);
    rc.train.clip_frames = cfg.get_int("train", "clip_frames", rc.train.clip_frames);
    rc.train.fps_min = cfg.get_double("train", "fps_min", rc.train.fps_min);
    rc.train.fps_max = cfg.get_double("train", "fps_max", rc.train.fps_max);
    rc.train.validate();
    rc.run_dir = cfg.get_str("train", "run_dir", rc.run_dir);
    rc.checkpoint_every = cfg.get_int("train", "checkpoint_every", rc.checkpoint_every);
    rc.data_dir = cfg.get_str("train", "data_dir", "");

    if (auto seed = env_seed_override()) {
        rc.data.seed = *seed;
        rc.train.seed = *seed;
        rc.teacher_seed = *seed;
        rc.student_seed = *seed;
    }
    return rc;
}

std::string RunConfig::echo() const {
    std::ostringstream os;
    os << "[data]\n";
    os << "num_videos = " << data.num_videos << "\n";
    os << "frames = " << data.frames << "\n";
    os << "px = " << data.px << "\n";
    os << "motif = " << motif_to_string(data.motif) << "\n";
    os << "motion_px_per_frame = " << data.motion_px_per_frame << "\n";
    os << "seed = " << data.seed << "\n";
    os << "native_fps = " << fmt_g(data.native_fps) << "\n";
    os << "\n[teacher]\n";
    os << "num_layers = " << teacher.num_layers << "\n";
    os << "dim = " << teacher.dim << "\n";
    os << "heads = " << teacher.heads << "\n";
    os << "patch = " << teacher.patch << "\n";
    os << "input_px = " << teacher.input_px << "\n";
    os << "seed = " << teacher_seed << "\n";
    os << "\n[student]\n";
    os << "num_layers = " << student.num_layers << "\n";
    os << "dim = " << student.dim << "\n";
    os << "heads = " << student.heads << "\n";
    os << "patch = " << student.patch << "\n";
    os << "input_px = " << student.input_px << "\n";
    os << "temporal_kernel = " << student.temporal_kernel << "\n";
    os << "temporal_mixing = " << (student.temporal_mixing ? "true" : "false") << "\n";
    os << "stride_schedule = " << stride_schedule_to_string(student.stride_schedule) << "\n";
    os << "distill_proj_dim = " << student.distill_proj_dim << "\n";
    os << "init = " << student_init << "\n";
    os << "seed = " << student_seed << "\n";
    os << "\n[train]\n";
    os << "objective = " << (train.objective == Objective::Ctd ? "ctd" : "rtd") << "\n";
    os << "peak_lr = " << fmt_g(train.peak_lr) << "\n";
    os << "warmup_steps = " << train.warmup_steps << "\n";
    os << "total_steps = " << train.total_steps << "\n";
    os << "batch_size = " << train.batch_size << "\n";
    os << "weight_decay = " << fmt_g(train.weight_decay) << "\n";
    os << "grad_clip_norm = " << fmt_g(train.grad_clip_norm) << "\n";
    os << "outlier_sigma = " << fmt_g(train.outlier_sigma) << "\n";
    os << "seed = " << train.seed << "\n";
    os << "clip_frames = " << train.clip_frames << "\n";
    os << "fps_min = " << fmt_g(train.fps_min) << "\n";
    os << "fps_max = " << fmt_g(train.fps_max) << "\n";
    os << "run_dir = " << run_dir << "\n";
    os << "checkpoint_every = " << checkpoint_every << "\n";
    if (!data_dir.empty()) os << "data_dir = " << data_dir << "\n";
    return os.str();
}

void run_gen_data(const std::string& cfg_path, const std::string& out_dir) {
    Config cfg = Config::parse_file(cfg_path);
    cfg.require_known_keys("data", {"num_videos", "frames", "px", "motif", "motion_px_per_frame",
                                    "seed", "native_fps"});
    SyntheticVideoSpec spec;
    spec.num_videos = cfg.get_int("data", "num_videos", spec.num_videos);
    spec.frames = cfg.get_int("data", "frames", spec.frames);
    spec.px = cfg.get_int("data", "px", spec.px);
    spec.motif = motif_from_string(cfg.get_str("data", "motif", motif_to_string(spec.motif)));
    spec.motion_px_per_frame = cfg.get_int("data", "motion_px_per_frame", spec.motion_px_per_frame);
    spec.seed = cfg.get_u64("data", "seed", spec.seed);
    spec.native_fps = cfg.get_double("data", "native_fps", spec.native_fps);
    if (auto seed = env_seed_override()) spec.seed = *seed;
    spec.validate();
    write_corpus(spec, out_dir);
}

std::string training_log_csv(const std::vector<TrainLogRow>& log) {
    std::ostringstream os;
    os << "step,lr,loss,grad_norm\n";
    for (const auto& row : log)
        os << row.step << "," << fmt_g(row.lr) << "," << fmt_g(row.loss) << "," << fmt_g(row.grad_norm)
           << "\n";
    return os.str();
}

void run_distill(const std::string& cfg_path) {
    namespace fs = std::filesystem;
    RunConfig rc = resolve_run_config(Config::parse_file(cfg_path));

    std::vector<TensorPtr> videos;
    double native_fps = rc.data.native_fps;
    if (!rc.data_dir.empty()) {
        LoadedCorpus corpus = load_corpus(rc.data_dir);
        videos = std::move(corpus.videos);
        native_fps = corpus.spec.native_fps;
    } else {
        videos = generate_corpus(rc.data);
    }

    ModelParams teacher = init_params(rc.teacher, rc.teacher_seed);
    teacher.set_requires_grad(false);

    bool teacher_compatible = rc.student.dim <= rc.teacher.dim &&
                              rc.student.num_layers <= rc.teacher.num_layers &&
                              rc.student.patch == rc.teacher.patch &&
                              rc.student.input_px == rc.teacher.input_px;
    ModelParams student;
    if (rc.student_init == "teacher" || (rc.student_init == "auto" && teacher_compatible))
        student = init_student_from_teacher(rc.teacher, teacher, rc.student);
    else if (rc.student_init == "random" || rc.student_init == "auto")
        student = init_params(rc.student, rc.student_seed);

    DecoderParams decoder;
    DecoderParams* decoder_ptr = nullptr;
    if (rc.train.objective == Objective::Rtd) {
        int64_t block_volume = rc.student.compression_ratio();
        decoder = init_decoder_params(block_volume, rc.teacher.dim, 2, rc.student_seed + 1);
        decoder_ptr = &decoder;
    }

    std::error_code ec;
    fs::create_directories(rc.run_dir, ec);
    {
        std::ofstream os(fs::path(rc.run_dir) / "run.cfg");
        if (!os) throw IoError("cannot write run.cfg in " + rc.run_dir);
        os << rc.echo();
    }

    auto checkpoint_cb = [&](int64_t steps_done) {
        bool last = steps_done == rc.train.total_steps;
        bool periodic = rc.checkpoint_every > 0 && steps_done % rc.checkpoint_every == 0;
        if (!last && !periodic) return;
        std::string dir = (fs::path(rc.run_dir) / ("checkpoint_" + std::to_string(steps_done))).string();
        save_checkpoint(dir, rc.student, student);
    };

    TrainResult result = train(rc.teacher, teacher, rc.student, student, decoder_ptr, videos,
                               native_fps, rc.train, checkpoint_cb);
    {
        std::ofstream os(fs::path(rc.run_dir) / "log.csv");
        if (!os) throw IoError("cannot write log.csv in " + rc.run_dir);
        os << training_log_csv(result.log);
    }
    if (result.aborted) throw NumericError("training aborted: " + result.abort_reason);
}

ProfileConfig resolve_profile_config(const Config& cfg) {
    ProfileConfig pc;
    cfg.require_known_keys(
        "profile", {"frames", "strategies", "r", "tokens_per_frame", "vision_layers", "vision_dim",
                    "vision_heads", "vision_tokens_per_frame", "mlp_ratio", "temporal_kernel",
                    "student_layers", "student_dim", "student_heads", "student_schedule", "llm_layers",
                    "llm_dim", "llm_mlp_ratio", "llm_kv_heads", "llm_query_heads", "measure",
                    "measure_component", "warmup", "iters", "output"});
    for (const std::string& f : split_csv(cfg.get_str("profile", "frames", "8,16,32,64,128,256,512")))
        pc.frames.push_back(std::stoll(f));
    if (pc.frames.empty()) throw ConfigError("[profile] frames list is empty");
    pc.strategies = split_csv(cfg.get_str("profile", "strategies", "none,posthoc,internal"));
    pc.r = cfg.get_int("profile", "r", pc.r);
    pc.tokens_per_frame = cfg.get_int("profile", "tokens_per_frame", pc.tokens_per_frame);

    pc.vision.family = ArchFamily::FrameWiseVit;
    pc.vision.layers = static_cast<int>(cfg.get_int("profile", "vision_layers", 24));
    pc.vision.dim = static_cast<int>(cfg.get_int("profile", "vision_dim", 1024));
    pc.vision.heads = static_cast<int>(cfg.get_int("profile", "vision_heads", 16));
    pc.vision.tokens_per_frame = cfg.get_int("profile", "vision_tokens_per_frame", 1025);
    pc.vision.mlp_ratio = static_cast<int>(cfg.get_int("profile", "mlp_ratio", 4));
    pc.vision.temporal_kernel = static_cast<int>(cfg.get_int("profile", "temporal_kernel", 3));

    pc.student = pc.vision;
    pc.student.family = ArchFamily::DwTempConv;
    pc.student.layers = static_cast<int>(cfg.get_int("profile", "student_layers", 12));
    pc.student.dim = static_cast<int>(cfg.get_int("profile", "student_dim", 768));
    pc.student.heads = static_cast<int>(cfg.get_int("profile", "student_heads", 12));
    pc.student.stride_schedule =
        parse_stride_schedule(cfg.get_str("profile", "student_schedule", "4:2x2x2,8:2x1x1"));

    pc.llm.layers = static_cast<int>(cfg.get_int("profile", "llm_layers", 32));
    pc.llm.dim = static_cast<int>(cfg.get_int("profile", "llm_dim", 4096));
    pc.llm.mlp_ratio = static_cast<int>(cfg.get_int("profile", "llm_mlp_ratio", 4));
    pc.llm.kv_heads = static_cast<int>(cfg.get_int("profile", "llm_kv_heads", 32));
    pc.llm.query_heads = static_cast<int>(cfg.get_int("profile", "llm_query_heads", 32));

    pc.measure = cfg.get_bool("profile", "measure", false);
    pc.measure_component = cfg.get_str("profile", "measure_component", "desk");
    if (pc.measure_component != "desk" && pc.measure_component != "stub")
        throw ConfigError("[profile] measure_component must be desk or stub");
    pc.warmup = static_cast<int>(cfg.get_int("profile", "warmup", 40));
    pc.iters = static_cast<int>(cfg.get_int("profile", "iters", 100));
    pc.output = cfg.get_str("profile", "output", "");

    pc.vision.validate();
    pc.student.validate();
    pc.llm.validate();
    return pc;
}

namespace {

Strategy strategy_from_name(const ProfileConfig& pc, const std::string& name) {
    Strategy st;
    if (name == "none") {
        st.kind = StrategyKind::None;
        st.r = 1;
    } else if (name == "posthoc") {
        st.kind = StrategyKind::PostHoc;
        st.r = pc.r;
    } else if (name == "internal") {
        st.kind = StrategyKind::Internal;
        st.r = pc.r;
        st.student = pc.student;
    } else {
        throw ConfigError("unknown profile strategy '" + name + "'");
    }
    return st;
}

// desk-scale measurement stand-ins for the analytic rows
struct DeskMeasure {
    EncoderSpec teacher_spec = desk_teacher_spec();
    ModelParams teacher = init_params(teacher_spec, 7);
    EncoderSpec student_spec = desk_student_spec();
    ModelParams student = init_params(student_spec, 11);
};

}  // namespace

std::string profile_csv(const ProfileConfig& pc) {
    std::ostringstream os;
    os << "frames,strategy,flops_vision,flops_llm,flops_total,tokens_llm";
    if (pc.measure) os << ",lat_vision_ms,lat_total_ms";
    os << "\n";

    std::optional<DeskMeasure> desk;
    if (pc.measure && pc.measure_component == "desk") desk.emplace();

    for (int64_t frames : pc.frames) {
        for (const std::string& name : pc.strategies) {
            Strategy st = strategy_from_name(pc, name);
            CostReport rep = bottleneck_report(pc.vision, pc.llm, st, frames, pc.tokens_per_frame);
            os << frames << "," << st.label() << "," << u128_to_string(rep.flops_vision) << ","
               << u128_to_string(rep.flops_llm_prefill) << "," << u128_to_string(rep.flops_total) << ","
               << rep.tokens_into_llm;
            if (pc.measure) {
                double lat_vision = 0.0, lat_aux = 0.0;
                if (pc.measure_component == "stub") {
                    lat_vision = wallclock_profile([] {}, pc.warmup, pc.iters).median_ms;
                } else {
                    auto clip = make_tensor({frames, 32, 32, 3}, 0.25f);
                    if (st.kind == StrategyKind::Internal) {
                        lat_vision = wallclock_profile(
                                         [&] { student_forward(nullptr, clip, desk->student_spec, desk->student); },
                                         pc.warmup, pc.iters)
                                         .median_ms;
                    } else {
                        FeatureMap dense;
                        lat_vision = wallclock_profile(
                                         [&] { dense = teacher_forward(nullptr, clip, desk->teacher_spec, desk->teacher); },
                                         pc.warmup, pc.iters)
                                         .median_ms;
                        if (st.kind == StrategyKind::PostHoc) {
                            int64_t tt = frames % 4 == 0 ? frames / 4 : frames;
                            BlockPartition part = partition_blocks(frames, 8, 8, tt, 4, 4);
                            lat_aux = wallclock_profile([&] { wap_compress(dense, part); }, pc.warmup,
                                                        pc.iters)
                                          .median_ms;
                        }
                    }
                }
                char buf[64];
                std::snprintf(buf, sizeof(buf), ",%.6g,%.6g", lat_vision, lat_vision + lat_aux);
                os << buf;
            }
            os << "\n";
        }
    }
    return os.str();
}

void run_profile(const std::string& cfg_path, const std::string& output_override) {
    ProfileConfig pc = resolve_profile_config(Config::parse_file(cfg_path));
    if (!output_override.empty()) pc.output = output_override;
    std::string csv = profile_csv(pc);
    if (pc.output.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream os(pc.output);
        if (!os) throw IoError("cannot write profile CSV to " + pc.output);
        os << csv;
    }
}

}  // namespace litetok
