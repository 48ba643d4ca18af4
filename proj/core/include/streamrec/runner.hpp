#pragma once

#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "streamrec/bagging.hpp"
#include "streamrec/ingest.hpp"
#include "streamrec/prequential.hpp"

namespace streamrec {

enum class ModelKind { isgd, bagged };

// How the ensemble consumes the warm-up slice: resample feeds it through the
// bagged update (one Poisson draw per node per event); clone trains a single
// model and copies it into every node.
enum class WarmupMode { resample, clone };

struct RunConfig {
    DatasetSpec dataset;
    Hyperparameters hp;
    ModelKind model = ModelKind::isgd;
    std::size_t nodes = 64;
    EvalConfig eval;
    std::uint64_t seed = 42;
    unsigned threads = std::thread::hardware_concurrency();
    std::string output_dir = "results";
    MissingNodeScore agg_missing = MissingNodeScore::as_zero;
    WarmupMode warmup_mode = WarmupMode::resample;
    bool stub_sampler_one = false;  // test hook: every bootstrap draw is 1
    bool no_timing = false;         // omit timing columns from all outputs

    void validate() const;
};

// Full run: load, positivize, warm up, evaluate, and write summary.csv,
// steps.csv and recall20_ma.csv under output_dir. Returns a process exit
// status; failures print a one-line diagnostic to stderr.
int execute(const RunConfig& cfg);

// One baseline ISGD run plus one bagged run per node count, all rows
// appended to a single summary.csv. Requires cfg.model == bagged.
int sweep(const RunConfig& cfg, const std::vector<std::size_t>& node_counts);

}  // namespace streamrec
