#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "streamrec/core.hpp"

namespace streamrec {

// Where a stream comes from and how to positivize it. Rating datasets keep
// only events whose rating falls in the top `keep_top_fraction` of the scale.
struct DatasetSpec {
    std::string path;
    bool has_rating = false;
    double rating_scale_min = 0.0;
    double rating_scale_max = 0.0;
    double keep_top_fraction = 0.20;
    bool skip_header = false;

    double rating_threshold() const {
        return rating_scale_max -
               keep_top_fraction * (rating_scale_max - rating_scale_min);
    }

    void validate() const;
};

// One event per line: user TAB item [TAB rating [TAB timestamp]].
// Fields are whitespace-trimmed; user and item must be non-empty.
InteractionEvent parse_event_line(std::string_view line, std::size_t line_no);

// Inverse of parse_event_line, without the trailing newline.
std::string format_event_line(const InteractionEvent& event);

// Reads the whole stream in source order. Skips '#' comments and blank
// lines; `skip_header` drops the first line. Asserts non-decreasing
// timestamps across the events that carry one.
std::vector<InteractionEvent> read_events(std::istream& in, bool skip_header);
std::vector<InteractionEvent> read_events(const DatasetSpec& spec);

// Keeps events with rating >= the top-fraction threshold, preserving order
// and dropping ratings from the survivors. Every event must carry a rating.
std::vector<InteractionEvent> threshold_filter(
    std::vector<InteractionEvent> events, const DatasetSpec& spec);

struct WarmupSplit {
    std::vector<InteractionEvent> warmup;
    std::vector<InteractionEvent> evaluation;
};

// First floor(fraction * size) events go to warm-up, the rest to evaluation;
// order preserved in both.
WarmupSplit split_warmup(std::vector<InteractionEvent> events, double fraction);

}  // namespace streamrec
