#include "facematch/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "facematch/geometry.hpp"

namespace facematch {

std::vector<TimelineSegment> emit_timeline(std::span<const TimelineRecord> records, double fps) {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw Error("fps must be positive");
  std::map<std::string, std::set<std::uint64_t>> frames;
  for (const auto& r : records) frames[r.identity].insert(r.frame_index);

  std::vector<TimelineSegment> out;
  for (const auto& [identity, set] : frames) {
    auto it = set.begin();
    while (it != set.end()) {
      const std::uint64_t first = *it;
      std::uint64_t last = first;
      for (++it; it != set.end() && *it == last + 1; ++it) last = *it;
      out.push_back({identity, static_cast<double>(first) / fps, static_cast<double>(last) / fps,
                     first, last});
    }
  }
  std::sort(out.begin(), out.end(), [](const TimelineSegment& a, const TimelineSegment& b) {
    return std::tie(a.first_frame, a.identity) < std::tie(b.first_frame, b.identity);
  });
  return out;
}

std::map<std::uint64_t, std::set<std::string>> expand_timeline(
    std::span<const TimelineSegment> segments) {
  std::map<std::uint64_t, std::set<std::string>> out;
  for (const auto& s : segments) {
    if (s.first_frame > s.last_frame) throw Error("segment ends before it starts");
    for (std::uint64_t f = s.first_frame; f <= s.last_frame; ++f) out[f].insert(s.identity);
  }
  return out;
}

}  // namespace facematch
