#include "pupilwatch/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pupilwatch/signal_model.hpp"

namespace pupilwatch {

namespace {

std::string fmt_value(double x) {
  if (is_missing(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

double parse_field(const std::string& s) {
  if (s.empty()) return missing_marker();
  return std::stod(s);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_recording_csv(const Recording& r, const std::filesystem::path& samples,
                         const std::filesystem::path& events) {
  std::ofstream fs(samples);
  if (!fs) throw std::runtime_error("cannot write " + samples.string());
  fs << "t_s,pd_mm,gaze_x,gaze_y\n";
  char tbuf[32];
  for (std::size_t i = 0; i < r.length(); ++i) {
    std::snprintf(tbuf, sizeof(tbuf), "%.3f", static_cast<double>(i) / r.sample_rate_hz);
    fs << tbuf << ',' << fmt_value(r.pd_mm[i]) << ',' << fmt_value(r.gaze_x[i]) << ','
       << fmt_value(r.gaze_y[i]) << '\n';
  }
  std::ofstream fe(events);
  if (!fe) throw std::runtime_error("cannot write " + events.string());
  fe << "stimulus_time_s\n";
  char ebuf[32];
  for (double t : r.stimulus_times_s) {
    std::snprintf(ebuf, sizeof(ebuf), "%.6f", t);
    fe << ebuf << '\n';
  }
}

Recording read_recording_csv(const std::filesystem::path& samples,
                             const std::filesystem::path& events) {
  std::ifstream fs(samples);
  if (!fs) throw std::runtime_error("cannot read " + samples.string());
  Recording r;
  std::string line;
  if (!std::getline(fs, line)) throw std::runtime_error("empty samples file");
  while (std::getline(fs, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4)
      throw std::runtime_error("bad row in " + samples.string());
    r.pd_mm.push_back(parse_field(fields[1]));
    r.gaze_x.push_back(parse_field(fields[2]));
    r.gaze_y.push_back(parse_field(fields[3]));
  }
  std::ifstream fe(events);
  if (!fe) throw std::runtime_error("cannot read " + events.string());
  if (!std::getline(fe, line)) throw std::runtime_error("empty events file");
  while (std::getline(fe, line)) {
    if (line.empty() || line == "\r") continue;
    r.stimulus_times_s.push_back(std::stod(line));
  }
  return r;
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "# participant session task samples events\n";
  for (const auto& e : entries)
    f << e.participant_id << ' ' << e.session_id << ' ' << to_string(e.task) << ' '
      << e.samples_path << ' ' << e.events_path << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ManifestEntry e;
    std::string task;
    if (!(ss >> e.participant_id >> e.session_id >> task >> e.samples_path >>
          e.events_path))
      throw std::runtime_error("bad manifest line: " + line);
    if (!task_from_string(task, e.task))
      throw std::runtime_error("unknown task in manifest: " + task);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Recording> load_cohort(const std::filesystem::path& manifest_path) {
  const auto base = manifest_path.parent_path();
  std::vector<Recording> out;
  for (const auto& e : read_manifest(manifest_path)) {
    Recording r = read_recording_csv(base / e.samples_path, base / e.events_path);
    r.participant_id = e.participant_id;
    r.session_id = e.session_id;
    r.task = e.task;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace pupilwatch
