#include "streamrec/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace streamrec {

namespace {

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n";
    const auto begin = s.find_first_not_of(ws);
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(ws);
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

double parse_rating(std::string_view field, std::size_t line_no) {
    // from_chars<double> handles the plain decimal forms used by the rating
    // datasets; locale never enters.
    double value = 0.0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(line_no,
                         "bad rating '" + std::string(field) + "'");
    return value;
}

std::int64_t parse_timestamp(std::string_view field, std::size_t line_no) {
    std::int64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw ParseError(line_no,
                         "bad timestamp '" + std::string(field) + "'");
    return value;
}

}  // namespace

void DatasetSpec::validate() const {
    if (has_rating && !(rating_scale_min < rating_scale_max))
        throw std::invalid_argument(
            "rating scale min must be below scale max");
    if (!(keep_top_fraction > 0.0) || keep_top_fraction > 1.0)
        throw std::invalid_argument("keep_top_fraction must be in (0, 1]");
}

InteractionEvent parse_event_line(std::string_view line, std::size_t line_no) {
    auto fields = split_tabs(line);
    if (fields.size() < 2)
        throw ParseError(line_no, "expected at least user and item fields");
    if (fields.size() > 4)
        throw ParseError(line_no, "too many fields");

    InteractionEvent event;
    event.user = std::string(trim(fields[0]));
    event.item = std::string(trim(fields[1]));
    if (event.user.empty()) throw ParseError(line_no, "empty user id");
    if (event.item.empty()) throw ParseError(line_no, "empty item id");
    if (fields.size() >= 3) event.rating = parse_rating(trim(fields[2]), line_no);
    if (fields.size() == 4)
        event.timestamp = parse_timestamp(trim(fields[3]), line_no);
    return event;
}

std::string format_event_line(const InteractionEvent& event) {
    std::string out = event.user;
    out += '\t';
    out += event.item;
    if (event.rating) {
        // Shortest representation that reparses to the same double.
        char buf[32];
        const auto [ptr, ec] =
            std::to_chars(buf, buf + sizeof(buf), *event.rating);
        out += '\t';
        out.append(buf, ptr);
    }
    if (event.timestamp) {
        if (!event.rating)
            throw std::invalid_argument(
                "timestamp without rating is not representable in the "
                "event-line format");
        out += '\t';
        out += std::to_string(*event.timestamp);
    }
    return out;
}

std::vector<InteractionEvent> read_events(std::istream& in, bool skip_header) {
    std::vector<InteractionEvent> events;
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::int64_t> last_ts;
    bool header_pending = skip_header;

    while (std::getline(in, line)) {
        ++line_no;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        auto event = parse_event_line(line, line_no);
        if (event.timestamp) {
            if (last_ts && *event.timestamp < *last_ts)
                throw DataError("line " + std::to_string(line_no) +
                                ": timestamp decreases; stream must be "
                                "chronologically ordered");
            last_ts = event.timestamp;
        }
        events.push_back(std::move(event));
    }
    return events;
}

std::vector<InteractionEvent> read_events(const DatasetSpec& spec) {
    std::ifstream in(spec.path);
    if (!in)
        throw DataError("cannot open input file: " + spec.path);
    return read_events(in, spec.skip_header);
}

std::vector<InteractionEvent> threshold_filter(
    std::vector<InteractionEvent> events, const DatasetSpec& spec) {
    if (!spec.has_rating)
        throw std::logic_error("threshold_filter requires a rating dataset");
    spec.validate();
    const double threshold = spec.rating_threshold();

    std::vector<InteractionEvent> kept;
    kept.reserve(events.size());
    for (auto& event : events) {
        if (!event.rating)
            throw DataError("event (" + event.user + ", " + event.item +
                            ") has no rating");
        if (*event.rating >= threshold) {
            event.rating.reset();
            kept.push_back(std::move(event));
        }
    }
    return kept;
}

WarmupSplit split_warmup(std::vector<InteractionEvent> events,
                         double fraction) {
    if (fraction < 0.0 || fraction >= 1.0)
        throw std::invalid_argument("warmup fraction must be in [0, 1)");
    const auto count = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(events.size())));

    WarmupSplit split;
    split.warmup.assign(std::make_move_iterator(events.begin()),
                        std::make_move_iterator(events.begin() + count));
    split.evaluation.assign(std::make_move_iterator(events.begin() + count),
                            std::make_move_iterator(events.end()));
    return split;
}

}  // namespace streamrec
