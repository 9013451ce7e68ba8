#ifndef PUPILWATCH_SIGNAL_MODEL_HPP
#define PUPILWATCH_SIGNAL_MODEL_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pupilwatch/types.hpp"

namespace pupilwatch {

/// One invariant violation found in a Recording. Violations are data, not
/// exceptions: callers decide what to do with a non-empty report.
struct Violation {
  std::string what;
};

/// Checks every Recording invariant. Pure; returns empty iff the recording
/// is well formed.
std::vector<Violation> validate_recording(const Recording& r);

struct ChangeCurve {
  double t_lo_s = 0.0;           // offset of the first sample relative to ST
  std::vector<double> mean;      // pointwise mean of deltas across events
  std::vector<double> std_dev;   // pointwise population std
  std::size_t events_used = 0;
  std::size_t events_skipped = 0;

  double time_at(std::size_t i) const {
    return t_lo_s + static_cast<double>(i) / kSampleRateHz;
  }
};

/// Event-locked mean/std curve of PD change relative to the sample at each
/// stimulus time. Events whose window leaves the recording or touches a
/// missing sample are skipped. Throws std::runtime_error when no event
/// survives.
ChangeCurve pd_change_curve(const std::vector<Recording>& recordings,
                            double t_lo_s, double t_hi_s);

/// Median of all non-missing PD samples per participant, pooled over that
/// participant's sessions and tasks. Throws when a participant has no valid
/// sample.
std::map<std::string, double> median_pd(const std::vector<Recording>& recordings);

}  // namespace pupilwatch

#endif
