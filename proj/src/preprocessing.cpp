#include "pupilwatch/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "pupilwatch/rng.hpp"
#include "pupilwatch/signal_model.hpp"

namespace pupilwatch {

std::string to_string(WindowRole r) {
  switch (r) {
    case WindowRole::Pre: return "pre";
    case WindowRole::Onset: return "onset";
    case WindowRole::Post: return "post";
  }
  return "?";
}

std::vector<ZScoreParams> fit_zscore(const Recording& r) {
  std::vector<ZScoreParams> out;
  for (Channel c : {Channel::PD, Channel::GazeX, Channel::GazeY}) {
    const auto& series = r.channel(c);
    double sum = 0.0;
    std::size_t n = 0;
    for (double x : series)
      if (!is_missing(x)) {
        sum += x;
        ++n;
      }
    if (n == 0)
      throw std::runtime_error("channel " + to_string(c) + " entirely missing");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : series)
      if (!is_missing(x)) ss += (x - mean) * (x - mean);
    ZScoreParams p;
    p.participant_id = r.participant_id;
    p.session_id = r.session_id;
    p.task = r.task;
    p.channel = c;
    p.mean = mean;
    p.std_dev = std::sqrt(ss / static_cast<double>(n));
    p.degenerate = (p.std_dev == 0.0);
    out.push_back(std::move(p));
  }
  return out;
}

Recording apply_zscore(const Recording& r, const std::vector<ZScoreParams>& params) {
  Recording out = r;
  for (const ZScoreParams& p : params) {
    if (p.participant_id != r.participant_id || p.session_id != r.session_id ||
        p.task != r.task)
      throw std::runtime_error("z-score parameter key does not match recording");
    auto& series = out.channel(p.channel);
    for (double& x : series) {
      if (is_missing(x)) continue;
      x = p.degenerate ? 0.0 : (x - p.mean) / p.std_dev;
    }
  }
  return out;
}

std::vector<LabeledWindow> generate_labeled_samples(const Recording& rec) {
  constexpr long kHalf = 125;  // 0.5 s
  const long len = static_cast<long>(rec.length());
  std::vector<LabeledWindow> out;

  for (std::size_t ev = 0; ev < rec.stimulus_times_s.size(); ++ev) {
    const long st = time_to_index(rec.stimulus_times_s[ev], rec.sample_rate_hz);
    const struct {
      long start;
      WindowRole role;
    } slots[3] = {{st - kHalf, WindowRole::Pre},
                  {st + kHalf, WindowRole::Onset},
                  {st + 3 * kHalf, WindowRole::Post}};

    for (const auto& slot : slots) {
      if (slot.start < 0 || slot.start + kWindowSamples > len) continue;
      LabeledWindow w;
      bool complete = true;
      for (int c = 0; c < kNumChannels && complete; ++c) {
        const auto& series = rec.channel(static_cast<Channel>(c));
        auto& dst = w.values[static_cast<std::size_t>(c)];
        dst.resize(kWindowSamples);
        for (int i = 0; i < kWindowSamples; ++i) {
          const double x = series[static_cast<std::size_t>(slot.start + i)];
          if (is_missing(x)) {
            complete = false;
            break;
          }
          dst[static_cast<std::size_t>(i)] = x;
        }
      }
      if (!complete) continue;
      w.role = slot.role;
      w.label = (slot.role == WindowRole::Onset) ? 1 : 0;
      w.participant_id = rec.participant_id;
      w.session_id = rec.session_id;
      w.task = rec.task;
      w.stimulus_index = static_cast<std::uint32_t>(ev);
      out.push_back(std::move(w));
    }
  }
  return out;
}

SplitSpec split_by_participant(const std::vector<std::string>& participants,
                               std::size_t n_test, std::uint64_t seed) {
  std::vector<std::string> ids = participants;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (n_test >= ids.size())
    throw std::runtime_error("n_test must be smaller than the cohort");

  // Fisher-Yates with the project RNG so the split is platform-stable.
  Rng rng(mix_seed(seed, 0x73706c6974ULL));
  for (std::size_t i = ids.size(); i > 1; --i)
    std::swap(ids[i - 1], ids[rng.below(i)]);

  SplitSpec spec;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i < n_test)
      spec.test_participants.insert(ids[i]);
    else
      spec.train_participants.insert(ids[i]);
  }
  return spec;
}

namespace {

constexpr char kMagic[4] = {'P', 'W', 'I', 'N'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::ofstream& f, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
  f.write(reinterpret_cast<char*>(b), 2);
}
void put_u64(std::ofstream& f, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  f.write(reinterpret_cast<char*>(b), 8);
}
void put_f64(std::ofstream& f, double x) {
  std::uint64_t v;
  std::memcpy(&v, &x, 8);
  put_u64(f, v);
}
void put_str(std::ofstream& f, const std::string& s) {
  put_u16(f, static_cast<std::uint16_t>(s.size()));
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint16_t get_u16(std::ifstream& f) {
  unsigned char b[2];
  if (!f.read(reinterpret_cast<char*>(b), 2)) throw std::runtime_error("truncated file");
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}
std::uint64_t get_u64(std::ifstream& f) {
  unsigned char b[8];
  if (!f.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
double get_f64(std::ifstream& f) {
  const std::uint64_t v = get_u64(f);
  double x;
  std::memcpy(&x, &v, 8);
  return x;
}
std::string get_str(std::ifstream& f) {
  const std::uint16_t n = get_u16(f);
  std::string s(n, '\0');
  if (n && !f.read(s.data(), n)) throw std::runtime_error("truncated file");
  return s;
}

}  // namespace

void save_windows(const std::vector<LabeledWindow>& windows,
                  const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(kMagic, 4);
  put_u16(f, kVersion);
  put_u64(f, windows.size());
  for (const LabeledWindow& w : windows) {
    f.put(static_cast<char>(w.label));
    f.put(static_cast<char>(w.role));
    put_str(f, w.participant_id);
    put_str(f, w.session_id);
    put_str(f, to_string(w.task));
    put_u64(f, w.stimulus_index);
    for (const auto& ch : w.values)
      for (double x : ch) put_f64(f, x);
  }
}

std::vector<LabeledWindow> load_windows(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad magic in " + path.string());
  if (get_u16(f) != kVersion) throw std::runtime_error("unsupported version");
  const std::uint64_t count = get_u64(f);
  std::vector<LabeledWindow> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    LabeledWindow w;
    int label = f.get();
    int role = f.get();
    if (label < 0 || role < 0) throw std::runtime_error("truncated file");
    w.label = static_cast<std::uint8_t>(label);
    w.role = static_cast<WindowRole>(role);
    w.participant_id = get_str(f);
    w.session_id = get_str(f);
    const std::string task = get_str(f);
    if (!task_from_string(task, w.task))
      throw std::runtime_error("bad task string in archive");
    w.stimulus_index = static_cast<std::uint32_t>(get_u64(f));
    for (auto& ch : w.values) {
      ch.resize(kWindowSamples);
      for (double& x : ch) x = get_f64(f);
    }
    out.push_back(std::move(w));
  }
  return out;
}

void export_windows_csv(const std::vector<LabeledWindow>& windows,
                        const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "participant,session,task,stimulus_index,role,label,channel,sample,value\n";
  for (const LabeledWindow& w : windows)
    for (int c = 0; c < kNumChannels; ++c)
      for (int i = 0; i < kWindowSamples; ++i)
        f << w.participant_id << ',' << w.session_id << ',' << to_string(w.task) << ','
          << w.stimulus_index << ',' << to_string(w.role) << ',' << int(w.label) << ','
          << to_string(static_cast<Channel>(c)) << ',' << i << ','
          << w.values[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] << '\n';
}

}  // namespace pupilwatch
