#pragma once

#include <map>
#include <string>
#include <vector>

#include "marl/analysis/metrics.hpp"

namespace marl::analysis {

// Comment lines start with '#'. Their key=value tokens are collected in `meta`.
struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws when absent
  std::vector<double> numbers(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

// One evaluation episode of a recording: per-agent mask ids and returns.
struct RecordedEpisode {
  std::vector<MaskSequence> masks;
  std::vector<double> returns;
};

// Episodes are delimited by the step column restarting at 0.
std::vector<RecordedEpisode> episodes_from_recording(const CsvTable& t);

std::vector<double> team_spirit_curve(const CsvTable& runlog, int window);

struct AnalysisRow {
  std::string metric, env, variant;
  std::string seed;
  double value = 0.0;
  double stderr_ = 0.0;
};

// Coordination metrics of a recording (mask entropy, proximities, perf difference).
std::vector<AnalysisRow> analyze_recording(const CsvTable& t, int k);
// Final and smoothed team-spirit loss and best eval return of a RunLog.
std::vector<AnalysisRow> analyze_runlog(const CsvTable& t, int window);

std::string analysis_csv(const std::vector<AnalysisRow>& rows, const std::string& config_hash);

}  // namespace marl::analysis
