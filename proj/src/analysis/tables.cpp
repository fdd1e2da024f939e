#include "marl/analysis/tables.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "marl/agents/train.hpp"

namespace marl::analysis {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_number(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: " + s);
  return v;
}

std::string meta_or(const CsvTable& t, const std::string& key) {
  auto it = t.meta.find(key);
  return it == t.meta.end() ? "" : it->second;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return static_cast<int>(c);
  throw std::invalid_argument("missing CSV column: " + name);
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const auto c = static_cast<std::size_t>(column(name));
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(to_number(r.at(c)));
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream words(line.substr(1));
      std::string w;
      while (words >> w) {
        auto eq = w.find('=');
        if (eq != std::string::npos) t.meta[w.substr(0, eq)] = w.substr(eq + 1);
      }
      continue;
    }
    auto cells = split(line, ',');
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size())
        throw std::invalid_argument("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                                    std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw std::invalid_argument("CSV without header");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream s;
  s << in.rdbuf();
  return parse_csv(s.str());
}

std::vector<RecordedEpisode> episodes_from_recording(const CsvTable& t) {
  const auto step = static_cast<std::size_t>(t.column("step"));
  const auto agent = static_cast<std::size_t>(t.column("agent_id"));
  const auto reward = static_cast<std::size_t>(t.column("reward"));
  const auto mask = static_cast<std::size_t>(t.column("mask_id"));
  std::vector<RecordedEpisode> out;
  for (const auto& r : t.rows) {
    const int s = std::stoi(r[step]);
    const auto a = static_cast<std::size_t>(std::stoi(r[agent]));
    if (s == 0 && a == 0) out.emplace_back();
    if (out.empty()) throw std::invalid_argument("recording does not start at step 0");
    RecordedEpisode& e = out.back();
    if (e.masks.size() <= a) {
      e.masks.resize(a + 1);
      e.returns.resize(a + 1, 0.0);
    }
    e.masks[a].push_back(std::stoi(r[mask]));
    e.returns[a] += to_number(r[reward]);
  }
  return out;
}

std::vector<double> team_spirit_curve(const CsvTable& runlog, int window) {
  return moving_average(runlog.numbers("team_spirit_loss"), window);
}

std::vector<AnalysisRow> analyze_recording(const CsvTable& t, int k) {
  const std::string env = meta_or(t, "env"), variant = meta_or(t, "variant"), seed = meta_or(t, "seed");
  const std::string mode = meta_or(t, "mode");
  const std::string suffix = mode.empty() ? "" : "_" + mode;
  auto episodes = episodes_from_recording(t);
  if (episodes.empty()) throw std::invalid_argument("recording has no episodes");
  const std::size_t n = episodes.front().masks.size();
  std::vector<AnalysisRow> out;
  auto push = [&](const std::string& metric, const std::vector<double>& xs) {
    out.push_back({metric, env, variant, seed, mean(xs), standard_error(xs)});
  };

  const bool masked = episodes.front().masks.front().front() >= 0;
  if (masked) {
    std::vector<double> entropy;
    for (std::size_t a = 0; a < n; ++a) {
      MaskSequence all;
      for (const auto& e : episodes) all.insert(all.end(), e.masks[a].begin(), e.masks[a].end());
      entropy.push_back(mask_entropy(all, k));
    }
    push("mask_entropy" + suffix, entropy);
    if (n >= 2) {
      std::vector<double> plain, best;
      for (const auto& e : episodes) {
        plain.push_back(mean_pairwise_proximity(e.masks, false, k));
        best.push_back(mean_pairwise_proximity(e.masks, true, k));
      }
      push("hamming_proximity" + suffix, plain);
      push("best_equivalence_proximity" + suffix, best);
    }
  }
  std::vector<double> totals;
  for (const auto& e : episodes) {
    double s = 0;
    for (double r : e.returns) s += r;
    totals.push_back(s / static_cast<double>(e.returns.size()));
  }
  push("mean_return" + suffix, totals);
  if (n == 2) {
    std::vector<double> a, b;
    for (const auto& e : episodes) {
      a.push_back(e.returns[0]);
      b.push_back(e.returns[1]);
    }
    out.push_back({"perf_difference" + suffix, env, variant, seed, perf_difference(a, b), 0.0});
  }
  return out;
}

std::vector<AnalysisRow> analyze_runlog(const CsvTable& t, int window) {
  const std::string env = meta_or(t, "env"), variant = meta_or(t, "variant"), seed = meta_or(t, "seed");
  std::vector<AnalysisRow> out;
  auto returns = t.numbers("mean_return");
  if (returns.empty()) throw std::invalid_argument("RunLog without rows");
  double best = returns.front();
  for (double r : returns) best = std::max(best, r);
  out.push_back({"best_eval_return", env, variant, seed, best, 0.0});
  auto curve = team_spirit_curve(t, window);
  out.push_back({"final_team_spirit_loss", env, variant, seed, curve.back(), 0.0});
  return out;
}

std::string analysis_csv(const std::vector<AnalysisRow>& rows, const std::string& config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "metric,env,variant,seed,value,stderr\n";
  for (const auto& r : rows)
    out << r.metric << "," << r.env << "," << r.variant << "," << r.seed << "," << agents::format_real(r.value) << ","
        << agents::format_real(r.stderr_) << "\n";
  return out.str();
}

}  // namespace marl::analysis
