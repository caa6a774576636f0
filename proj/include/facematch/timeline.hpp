#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace facematch {

struct TimelineRecord {
  std::string identity;
  std::uint64_t frame_index = 0;
};

/// A maximal run of consecutive frames in which one identity is present.
struct TimelineSegment {
  std::string identity;
  double start_s = 0.0;
  double end_s = 0.0;
  std::uint64_t first_frame = 0;
  std::uint64_t last_frame = 0;

  friend bool operator==(const TimelineSegment&, const TimelineSegment&) = default;
};

/// Segments sorted by (first_frame, identity). Times are frame / fps.
std::vector<TimelineSegment> emit_timeline(std::span<const TimelineRecord> records,
                                           double fps = 1.0);

/// Frame -> identities present, the inverse of emit_timeline.
std::map<std::uint64_t, std::set<std::string>> expand_timeline(
    std::span<const TimelineSegment> segments);

}  // namespace facematch
