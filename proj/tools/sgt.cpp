// sgt: make-corpus, train, eval and serve.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "sgt/checkpoint.hpp"
#include "sgt/evaluation.hpp"
#include "sgt/service.hpp"
#include "sgt/training.hpp"

namespace fs = std::filesystem;
using namespace sgt;

namespace {

Service* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

int make_corpus(const fs::path& out, int clips, std::uint64_t seed, double hidden_scale) {
    CorpusConfig cfg;
    cfg.hidden_scale = hidden_scale;
    const auto ds = make_synthetic_corpus(clips, seed, cfg);
    save_dataset(out, ds);
    std::printf("wrote %zu clips to %s\n", ds.size(), out.string().c_str());
    return 0;
}

int run_train(const std::optional<fs::path>& config, const fs::path& data, const fs::path& out,
              std::optional<fs::path> history, std::uint64_t split_seed) {
    const TrainConfig cfg = config ? TrainConfig::from_json(read_json_file(*config)) : TrainConfig{};
    const auto split = split_dataset(load_dataset(data), split_seed);
    std::printf("train %zu clips (%s), val %zu clips (%s), test %zu clips held out\n", split.train.size(),
                dataset_fingerprint(split.train).c_str(), split.val.size(), dataset_fingerprint(split.val).c_str(),
                split.test.size());
    const auto result = train(split.train, split.val, cfg, [](const EpochRecord& r, double elapsed) {
        std::printf("epoch %3d  %7.1fs  fgd %.4f  pcs %.4f  scs %.4f  loss %.4f\n", r.epoch, elapsed, r.fgd, r.pcs,
                    r.scs, r.loss.total);
        std::fflush(stdout);
    });
    save_checkpoint(out, result.model);
    if (!history) history = fs::path(out.string() + ".history.csv");
    write_text_file(*history, history_csv(result.history));
    std::printf("best epoch %d; checkpoint %s; history %s\n", result.best_epoch, out.string().c_str(),
                history->string().c_str());
    return 0;
}

int run_eval(const fs::path& ckpt, const fs::path& data, const std::optional<fs::path>& report, bool all_clips,
             std::uint64_t split_seed) {
    const auto model = load_checkpoint(ckpt);
    const auto ds = load_dataset(data);
    const Dataset held_out = all_clips ? ds : split_dataset(ds, split_seed).test;
    const auto clips = prepare_clips(held_out, model.dictionary);
    const auto windows = make_windows(clips, model.config.window, 10, model.silence_feature());
    const auto r = evaluate(model, windows);
    if (report) write_text_file(*report, report_to_csv(r));
    std::cout << report_to_json(r).dump(2) << "\n";
    return 0;
}

int run_serve(const std::optional<fs::path>& ckpt, const std::string& host, int port, const fs::path& data_dir,
              const std::optional<fs::path>& static_dir, const std::optional<fs::path>& library_dir) {
    std::shared_ptr<const GeneratorModel> model;
    if (ckpt) model = std::make_shared<const GeneratorModel>(load_checkpoint(*ckpt));
    ServiceConfig cfg;
    cfg.data_dir = data_dir;
    cfg.static_dir = static_dir;
    auto library = MotionLibrary::builtin();
    if (library_dir) library.import_directory(*library_dir);
    Service svc(cfg, model, tts_from_env(), aligner_from_env(), std::move(library));
    if (!svc.bind(host, port)) {
        std::fprintf(stderr, "cannot bind %s:%d\n", host.c_str(), port);
        return 1;
    }
    g_service = &svc;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::printf("listening on http://%s:%d (model %s)\n", host.c_str(), port, model ? "loaded" : "not loaded");
    std::fflush(stdout);
    svc.listen_after_bind();
    g_service = nullptr;
    svc.store().sync();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Speech-driven gesture toolkit"};
    app.require_subcommand(1);

    fs::path corpus_out;
    int corpus_clips = 200;
    std::uint64_t corpus_seed = 7;
    double hidden_scale = CorpusConfig{}.hidden_scale;
    auto* mk = app.add_subcommand("make-corpus", "Write a synthetic speech and motion corpus");
    mk->add_option("--out", corpus_out, "Dataset directory")->required();
    mk->add_option("--clips", corpus_clips, "Number of clips")->check(CLI::Range(10, 100000));
    mk->add_option("--seed", corpus_seed, "Random seed");
    mk->add_option("--hidden-scale", hidden_scale, "Spread of hidden per-clip style factors")->check(CLI::Range(0.0, 1.0));

    std::optional<fs::path> train_config, history;
    fs::path data, out;
    std::uint64_t split_seed = 7;
    auto* tr = app.add_subcommand("train", "Train a generator and save the best-validation checkpoint");
    tr->add_option("--config", train_config, "Training config (JSON)")->check(CLI::ExistingFile);
    tr->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    tr->add_option("--out", out, "Checkpoint path")->required();
    tr->add_option("--history", history, "Metric history CSV (default <out>.history.csv)");
    tr->add_option("--split-seed", split_seed, "Seed of the train/val/test split");

    fs::path ckpt;
    std::optional<fs::path> report;
    bool all_clips = false;
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on held-out clips");
    ev->add_option("--ckpt", ckpt, "Checkpoint path")->required()->check(CLI::ExistingFile);
    ev->add_option("--data", data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--report", report, "Report CSV path");
    ev->add_option("--split-seed", split_seed, "Seed of the train/val/test split");
    ev->add_flag("--all", all_clips, "Evaluate every clip instead of the test split");

    std::optional<fs::path> serve_ckpt, static_dir, library_dir;
    std::string host = "127.0.0.1";
    int port = 8080;
    fs::path data_dir = "sgt-data";
    auto* sv = app.add_subcommand("serve", "Run the HTTP service");
    sv->add_option("--ckpt", serve_ckpt, "Checkpoint path; keyframe mode works without one")->check(CLI::ExistingFile);
    sv->add_option("--host", host, "Bind address");
    sv->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
    sv->add_option("--data-dir", data_dir, "Project store and audio cache directory");
    sv->add_option("--static-dir", static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
    sv->add_option("--library-dir", library_dir, "Extra gestures to import (index.json)")->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*mk) return make_corpus(corpus_out, corpus_clips, corpus_seed, hidden_scale);
        if (*tr) return run_train(train_config, data, out, history, split_seed);
        if (*ev) return run_eval(ckpt, data, report, all_clips, split_seed);
        if (*sv) return run_serve(serve_ckpt, host, port, data_dir, static_dir, library_dir);
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", std::string(to_string(e.code())).c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
