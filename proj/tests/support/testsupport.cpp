#include "testsupport.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <array>

#include "streamrec/bagging.hpp"
#include "streamrec/ingest.hpp"

namespace streamrec::test {

PoissonStats poisson_stats(std::uint64_t seed, std::size_t draws) {
    PoissonSampler sampler(seed);
    std::array<std::size_t, 9> bins{};
    double sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        const auto k = sampler.draw();
        sum += k;
        sq_sum += static_cast<double>(k) * k;
        bins[std::min<std::uint32_t>(k, 8)] += 1;
    }
    PoissonStats stats;
    stats.mean = sum / static_cast<double>(draws);
    stats.variance =
        sq_sum / static_cast<double>(draws) - stats.mean * stats.mean;
    stats.p0 = static_cast<double>(bins[0]) / static_cast<double>(draws);
    stats.p1 = static_cast<double>(bins[1]) / static_cast<double>(draws);

    double tail = 1.0;
    for (std::uint32_t k = 0; k < 8; ++k) tail -= PoissonSampler::pmf(k);
    for (std::uint32_t b = 0; b < 9; ++b) {
        const double expected =
            static_cast<double>(draws) *
            (b < 8 ? PoissonSampler::pmf(b) : tail);
        const double diff = static_cast<double>(bins[b]) - expected;
        stats.chi_square += diff * diff / expected;
    }
    return stats;
}

std::vector<InteractionEvent> clustered_stream(
    const ClusteredStreamConfig& cfg) {
    std::mt19937_64 engine(cfg.seed);
    const auto pick = [&engine](std::size_t n) {
        return static_cast<std::size_t>(engine() % n);
    };

    std::vector<std::size_t> user_cluster(cfg.users);
    for (auto& c : user_cluster) c = pick(cfg.clusters);

    std::vector<std::vector<std::size_t>> cluster_items(cfg.clusters);
    for (std::size_t i = 0; i < cfg.items; ++i)
        cluster_items[pick(cfg.clusters)].push_back(i);

    std::vector<InteractionEvent> events;
    events.reserve(cfg.events);
    for (std::size_t e = 0; e < cfg.events; ++e) {
        const std::size_t user = pick(cfg.users);
        const double coin =
            static_cast<double>(engine() >> 11) * 0x1.0p-53;
        std::size_t item;
        const auto& own = cluster_items[user_cluster[user]];
        if (coin < cfg.noise || own.empty())
            item = pick(cfg.items);
        else
            item = own[pick(own.size())];
        events.push_back({"u" + std::to_string(user),
                          "i" + std::to_string(item), std::nullopt,
                          std::nullopt});
    }
    return events;
}

void write_tsv(const std::filesystem::path& path,
               const std::vector<InteractionEvent>& events) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const auto& event : events) out << format_event_line(event) << '\n';
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("streamrec_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace streamrec::test
