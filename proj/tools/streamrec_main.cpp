#include <CLI11.hpp>

#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "streamrec/runner.hpp"

namespace {

std::vector<std::size_t> parse_node_list(const std::string& text) {
    std::vector<std::size_t> nodes;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto token = text.substr(
            start, comma == std::string::npos ? std::string::npos
                                              : comma - start);
        if (!token.empty()) nodes.push_back(std::stoull(token));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return nodes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Streaming top-N recommender: incremental matrix factorization with "
        "an online-bagging ensemble and a prequential evaluation harness"};

    streamrec::RunConfig cfg;
    cfg.threads = std::max(1u, std::thread::hardware_concurrency());

    std::string model = "isgd";
    std::string agg_missing = "zero";
    std::string cutoffs = "1,5,10,20";
    std::string sweep_nodes;

    app.add_option("--input", cfg.dataset.path, "Input TSV event stream")
        ->required();
    app.add_flag("--header", cfg.dataset.skip_header,
                 "Skip one header line in the input");
    app.add_flag("--has-rating", cfg.dataset.has_rating,
                 "Input carries a rating column; positivize by threshold");
    app.add_option("--scale-min", cfg.dataset.rating_scale_min,
                   "Rating scale minimum (with --has-rating)");
    app.add_option("--scale-max", cfg.dataset.rating_scale_max,
                   "Rating scale maximum (with --has-rating)");
    app.add_option("--keep-top-frac", cfg.dataset.keep_top_fraction,
                   "Fraction of the rating scale kept as positive")
        ->capture_default_str();
    app.add_option("--model", model, "Model to evaluate")
        ->check(CLI::IsMember({"isgd", "bagged"}))
        ->capture_default_str();
    app.add_option("--nodes", cfg.nodes, "Bootstrap node count (bagged)")
        ->capture_default_str();
    auto* sweep_opt =
        app.add_option("--sweep-nodes", sweep_nodes,
                       "Run a baseline plus one bagged run per node count "
                       "(comma-separated; bare flag means 8,16,32,64)")
            ->expected(0, 1);
    app.add_option("--k", cfg.hp.k, "Latent features")->capture_default_str();
    app.add_option("--iter", cfg.hp.iter, "SGD passes per event")
        ->capture_default_str();
    app.add_option("--lambda", cfg.hp.lambda, "Regularization factor")
        ->capture_default_str();
    app.add_option("--eta", cfg.hp.eta, "Learn rate")->capture_default_str();
    app.add_option("--cutoffs", cutoffs, "Recall cutoffs, ascending")
        ->capture_default_str();
    app.add_option("--list-size", cfg.eval.list_size,
                   "Maximum recommendation list length")
        ->capture_default_str();
    app.add_option("--warmup-frac", cfg.eval.warmup_fraction,
                   "Leading fraction of the stream used for unscored warm-up")
        ->capture_default_str();
    app.add_option("--ma-window", cfg.eval.moving_avg_window,
                   "Moving-average window for the recall series")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    app.add_option("--threads", cfg.threads,
                   "Worker threads for ensemble recommendation")
        ->capture_default_str();
    app.add_option("--agg-missing", agg_missing,
                   "Score for nodes missing a factor row: zero keeps the "
                   "all-node denominator, skip averages holding nodes only")
        ->check(CLI::IsMember({"zero", "skip"}))
        ->capture_default_str();
    app.add_flag("--stub-sampler-one", cfg.stub_sampler_one,
                 "Test hook: force every bootstrap draw to 1");
    app.add_flag("--no-timing", cfg.no_timing,
                 "Omit timing columns from all output files");
    app.add_option("--out", cfg.output_dir, "Output directory")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.model = model == "bagged" ? streamrec::ModelKind::bagged
                                      : streamrec::ModelKind::isgd;
        cfg.agg_missing = agg_missing == "skip"
                              ? streamrec::MissingNodeScore::skip_node
                              : streamrec::MissingNodeScore::as_zero;

        cfg.eval.cutoffs.clear();
        for (const auto c : parse_node_list(cutoffs))
            cfg.eval.cutoffs.push_back(static_cast<int>(c));

        if (cfg.dataset.has_rating &&
            !(cfg.dataset.rating_scale_min < cfg.dataset.rating_scale_max)) {
            std::cerr << "error: --has-rating requires --scale-min < "
                         "--scale-max\n";
            return 1;
        }

        if (sweep_opt->count() > 0) {
            // a bare --sweep-nodes selects the default ladder
            const auto node_counts = sweep_nodes.empty()
                                         ? std::vector<std::size_t>{8, 16, 32, 64}
                                         : parse_node_list(sweep_nodes);
            return streamrec::sweep(cfg, node_counts);
        }
        return streamrec::execute(cfg);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
}
