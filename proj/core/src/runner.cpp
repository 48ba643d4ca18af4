#include "streamrec/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace streamrec {

namespace {

namespace fs = std::filesystem;

std::string fixed6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

std::string fixed3(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", value);
    return buf;
}

struct LoadedStream {
    std::vector<InteractionEvent> warmup;
    std::vector<InteractionEvent> evaluation;
};

LoadedStream load_stream(const RunConfig& cfg) {
    auto events = read_events(cfg.dataset);
    if (cfg.dataset.has_rating)
        events = threshold_filter(std::move(events), cfg.dataset);
    auto split = split_warmup(std::move(events), cfg.eval.warmup_fraction);
    return {std::move(split.warmup), std::move(split.evaluation)};
}

struct RunResult {
    std::vector<StepRecord> records;
    Summary summary;
    std::optional<std::string> error;
};

RunResult run_one(const RunConfig& cfg, ModelKind kind, std::size_t nodes,
                  const LoadedStream& stream) {
    std::unique_ptr<Recommender> model;
    BaggedModel* bagged = nullptr;
    if (kind == ModelKind::isgd) {
        // The single model follows the node-0 factor stream, so a one-node
        // ensemble with the bootstrap stubbed to 1 reproduces it exactly.
        model = std::make_unique<IsgdModel>(
            cfg.hp, BaggedModel::node_factor_seed(cfg.seed, 0));
    } else {
        auto owned = std::make_unique<BaggedModel>(
            cfg.hp, nodes, cfg.seed, cfg.agg_missing, cfg.threads);
        bagged = owned.get();
        if (cfg.stub_sampler_one)
            bagged->set_bootstrap_override([](std::size_t) { return 1u; });
        model = std::move(owned);
    }

    SeenSets seen;
    RunResult result;
    try {
        if (bagged && cfg.warmup_mode == WarmupMode::clone) {
            bagged->warmup_by_cloning(stream.warmup);
            for (const auto& event : stream.warmup)
                seen.add(event.user, event.item);
        } else {
            train_unscored(stream.warmup, *model, seen);
        }
    } catch (const ModelDivergence& ex) {
        result.error = std::string("warm-up: ") + ex.what();
        result.summary = summarize(result.records, cfg.eval.cutoffs);
        return result;
    }

    auto outcome = run(stream.evaluation, *model, cfg.eval, seen);
    result.records = std::move(outcome.records);
    result.error = std::move(outcome.error);
    result.summary = summarize(result.records, cfg.eval.cutoffs);
    return result;
}

void write_summary_header(std::ostream& out, const RunConfig& cfg,
                          bool model_column) {
    if (model_column) out << "model,";
    for (const int c : cfg.eval.cutoffs) out << "recall@" << c << ',';
    if (!cfg.no_timing) out << "update_ms,rec_ms,";
    out << "scored,skipped_unknown_user,skipped_repeat\n";
}

void write_summary_row(std::ostream& out, const RunConfig& cfg,
                       const std::string& label, const Summary& summary) {
    if (!label.empty()) out << label << ',';
    for (const auto& recall : summary.mean_recall)
        out << (recall ? fixed6(*recall) : "") << ',';
    if (!cfg.no_timing) {
        out << (summary.mean_update_ms ? fixed3(*summary.mean_update_ms) : "")
            << ','
            << (summary.mean_rec_ms ? fixed3(*summary.mean_rec_ms) : "")
            << ',';
    }
    out << summary.scored << ',' << summary.skipped_unknown_user << ','
        << summary.skipped_repeat << '\n';
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out << ',';
        out << cells[i];
    }
    out << '\n';
}

void write_steps(const fs::path& path, const RunConfig& cfg,
                 const std::vector<StepRecord>& records) {
    std::ofstream out(path);
    std::vector<std::string> cells{"position", "status"};
    for (const int c : cfg.eval.cutoffs)
        cells.push_back("recall@" + std::to_string(c));
    if (!cfg.no_timing) {
        cells.emplace_back("update_ms");
        cells.emplace_back("rec_ms");
    }
    write_row(out, cells);

    for (const auto& record : records) {
        cells.clear();
        cells.push_back(std::to_string(record.position));
        cells.emplace_back(to_string(record.status));
        for (std::size_t c = 0; c < cfg.eval.cutoffs.size(); ++c)
            cells.push_back(record.status == StepStatus::scored
                                ? std::to_string(record.recall[c])
                                : "");
        if (!cfg.no_timing) {
            cells.push_back(record.update_ms ? fixed3(*record.update_ms) : "");
            cells.push_back(record.rec_ms ? fixed3(*record.rec_ms) : "");
        }
        write_row(out, cells);
    }
}

void write_recall_ma(const fs::path& path, const RunConfig& cfg,
                     const std::vector<StepRecord>& records) {
    const std::size_t last = cfg.eval.cutoffs.size() - 1;
    const auto series = scored_series(records, last);
    const auto smoothed = moving_average(series, cfg.eval.moving_avg_window);

    std::ofstream out(path);
    out << "scored_step,recall@" << cfg.eval.cutoffs[last] << "_ma\n";
    for (std::size_t i = 0; i < smoothed.size(); ++i)
        out << (i + 1) << ',' << fixed6(smoothed[i]) << '\n';
}

void report_run(const std::string& label, const RunConfig& cfg,
                const Summary& summary) {
    std::cout << (label.empty() ? "run" : label) << ": scored=" << summary.scored
              << " skipped_unknown_user=" << summary.skipped_unknown_user
              << " skipped_repeat=" << summary.skipped_repeat;
    for (std::size_t c = 0; c < summary.cutoffs.size(); ++c)
        if (summary.mean_recall[c])
            std::cout << " recall@" << summary.cutoffs[c] << '='
                      << fixed6(*summary.mean_recall[c]);
    if (!cfg.no_timing && summary.mean_update_ms)
        std::cout << " update_ms=" << fixed3(*summary.mean_update_ms);
    if (!cfg.no_timing && summary.mean_rec_ms)
        std::cout << " rec_ms=" << fixed3(*summary.mean_rec_ms);
    std::cout << '\n';
}

}  // namespace

void RunConfig::validate() const {
    dataset.validate();
    hp.validate();
    eval.validate();
    if (model == ModelKind::bagged && nodes < 1)
        throw std::invalid_argument("bagged model needs nodes >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (output_dir.empty())
        throw std::invalid_argument("output directory must not be empty");
}

int execute(const RunConfig& cfg) {
    try {
        cfg.validate();
        const auto stream = load_stream(cfg);
        const auto result = run_one(cfg, cfg.model, cfg.nodes, stream);

        fs::create_directories(cfg.output_dir);
        const fs::path dir(cfg.output_dir);
        {
            std::ofstream out(dir / "summary.csv");
            write_summary_header(out, cfg, false);
            write_summary_row(out, cfg, "", result.summary);
        }
        write_steps(dir / "steps.csv", cfg, result.records);
        write_recall_ma(dir / "recall20_ma.csv", cfg, result.records);

        if (result.error) {
            std::cerr << "error: model diverged at " << *result.error
                      << " (partial results written)\n";
            return 1;
        }
        report_run("", cfg, result.summary);
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
}

int sweep(const RunConfig& cfg, const std::vector<std::size_t>& node_counts) {
    try {
        cfg.validate();
        if (cfg.model != ModelKind::bagged)
            throw std::invalid_argument("sweep requires --model bagged");
        const auto stream = load_stream(cfg);

        fs::create_directories(cfg.output_dir);
        const fs::path dir(cfg.output_dir);
        {
            std::ofstream out(dir / "summary.csv");
            write_summary_header(out, cfg, true);
        }

        // Baseline first, then one bagged run per node count; the summary
        // grows a row at a time so an aborted sweep keeps finished rows.
        std::vector<std::pair<std::string, std::size_t>> plan{{"ISGD", 0}};
        for (const std::size_t m : node_counts)
            plan.emplace_back("M=" + std::to_string(m), m);

        for (const auto& [label, nodes] : plan) {
            const ModelKind kind =
                nodes == 0 ? ModelKind::isgd : ModelKind::bagged;
            const auto result = run_one(cfg, kind, nodes, stream);

            std::string slug = nodes == 0 ? "isgd" : "m" + std::to_string(nodes);
            write_steps(dir / ("steps_" + slug + ".csv"), cfg, result.records);
            write_recall_ma(dir / ("recall20_ma_" + slug + ".csv"), cfg,
                            result.records);
            {
                std::ofstream out(dir / "summary.csv", std::ios_base::app);
                write_summary_row(out, cfg, label, result.summary);
            }
            if (result.error) {
                std::cerr << "error: " << label << " diverged at "
                          << *result.error << " (sweep aborted)\n";
                return 1;
            }
            report_run(label, cfg, result.summary);
        }
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
}

}  // namespace streamrec
