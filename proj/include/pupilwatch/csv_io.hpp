#ifndef PUPILWATCH_CSV_IO_HPP
#define PUPILWATCH_CSV_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "pupilwatch/types.hpp"

namespace pupilwatch {

/// Manifest entry binding one recording's identity to its files on disk.
struct ManifestEntry {
  std::string participant_id;
  std::string session_id;
  TaskKind task;
  std::string samples_path;  // relative to the manifest's directory
  std::string events_path;
};

// Recording CSV: header `t_s,pd_mm,gaze_x,gaze_y`, rows at exact 4 ms
// spacing, empty field = missing sample.
void write_recording_csv(const Recording& r, const std::filesystem::path& samples,
                         const std::filesystem::path& events);

Recording read_recording_csv(const std::filesystem::path& samples,
                             const std::filesystem::path& events);

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path);

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Loads every recording listed in a manifest (paths resolved relative to
/// the manifest file).
std::vector<Recording> load_cohort(const std::filesystem::path& manifest_path);

}  // namespace pupilwatch

#endif
