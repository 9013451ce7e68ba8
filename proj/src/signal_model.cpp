#include "pupilwatch/signal_model.hpp"

#include <algorithm>
#include <cmath>

namespace pupilwatch {

std::string to_string(TaskKind t) {
  switch (t) {
    case TaskKind::DPT: return "DPT";
    case TaskKind::MA: return "MA";
    case TaskKind::PVT: return "PVT";
    case TaskKind::VWM: return "VWM";
  }
  return "?";
}

bool task_from_string(const std::string& s, TaskKind& out) {
  for (TaskKind t : kAllTasks) {
    if (to_string(t) == s) {
      out = t;
      return true;
    }
  }
  return false;
}

std::string to_string(Channel c) {
  switch (c) {
    case Channel::PD: return "PD";
    case Channel::GazeX: return "GazeX";
    case Channel::GazeY: return "GazeY";
  }
  return "?";
}

std::vector<Violation> validate_recording(const Recording& r) {
  std::vector<Violation> out;
  if (r.pd_mm.empty()) out.push_back({"empty recording"});
  if (r.gaze_x.size() != r.pd_mm.size() || r.gaze_y.size() != r.pd_mm.size())
    out.push_back({"channel length mismatch"});
  if (r.sample_rate_hz != kSampleRateHz)
    out.push_back({"sample rate must be 250 Hz"});
  const double dur = r.duration_s();
  for (std::size_t i = 0; i < r.stimulus_times_s.size(); ++i) {
    const double t = r.stimulus_times_s[i];
    if (t < 0.0 || t >= dur) {
      out.push_back({"event time out of range"});
      break;
    }
  }
  for (std::size_t i = 1; i < r.stimulus_times_s.size(); ++i) {
    if (!(r.stimulus_times_s[i] > r.stimulus_times_s[i - 1])) {
      out.push_back({"events not increasing"});
      break;
    }
  }
  return out;
}

ChangeCurve pd_change_curve(const std::vector<Recording>& recordings,
                            double t_lo_s, double t_hi_s) {
  if (!(t_lo_s < t_hi_s)) throw std::runtime_error("window bounds inverted");

  const long n = std::lround((t_hi_s - t_lo_s) * kSampleRateHz) + 1;
  const long off_lo = std::lround(t_lo_s * kSampleRateHz);

  ChangeCurve curve;
  curve.t_lo_s = t_lo_s;
  std::vector<double> sum(static_cast<std::size_t>(n), 0.0);

  // Visits every usable event; the skip logic is identical on both passes.
  const auto for_each_event = [&](auto&& fn, bool count) {
    for (const Recording& r : recordings) {
      const long len = static_cast<long>(r.length());
      for (double st : r.stimulus_times_s) {
        const long st_idx = time_to_index(st, r.sample_rate_hz);
        const long start = st_idx + off_lo;
        bool ok = start >= 0 && start + n <= len && st_idx >= 0 && st_idx < len;
        const double ref = ok ? r.pd_mm[static_cast<std::size_t>(st_idx)] : 0.0;
        ok = ok && !is_missing(ref);
        for (long i = 0; ok && i < n; ++i)
          ok = !is_missing(r.pd_mm[static_cast<std::size_t>(start + i)]);
        if (!ok) {
          if (count) ++curve.events_skipped;
          continue;
        }
        for (long i = 0; i < n; ++i)
          fn(static_cast<std::size_t>(i),
             r.pd_mm[static_cast<std::size_t>(start + i)] - ref);
        if (count) ++curve.events_used;
      }
    }
  };

  for_each_event([&](std::size_t i, double d) { sum[i] += d; }, true);
  if (curve.events_used == 0) throw std::runtime_error("no events");

  const double inv = 1.0 / static_cast<double>(curve.events_used);
  curve.mean.resize(static_cast<std::size_t>(n));
  curve.std_dev.resize(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i)
    curve.mean[static_cast<std::size_t>(i)] = sum[static_cast<std::size_t>(i)] * inv;

  // Second, centered pass: immune to the cancellation that a sum-of-squares
  // variance suffers when the deltas are large and nearly equal.
  std::vector<double> sq(static_cast<std::size_t>(n), 0.0);
  for_each_event(
      [&](std::size_t i, double d) {
        const double c = d - curve.mean[i];
        sq[i] += c * c;
      },
      false);
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    curve.std_dev[k] = std::sqrt(sq[k] * inv);
  }
  return curve;
}

std::map<std::string, double> median_pd(const std::vector<Recording>& recordings) {
  std::map<std::string, std::vector<double>> pooled;
  for (const Recording& r : recordings) {
    auto& v = pooled[r.participant_id];
    for (double x : r.pd_mm)
      if (!is_missing(x)) v.push_back(x);
  }
  std::map<std::string, double> out;
  for (auto& [pid, v] : pooled) {
    if (v.empty())
      throw std::runtime_error("participant " + pid + " has no valid PD samples");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    double med = v[mid];
    if (v.size() % 2 == 0) {
      const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(mid));
      med = 0.5 * (lo + med);
    }
    out[pid] = med;
  }
  return out;
}

}  // namespace pupilwatch
