#include "forgery/challenge_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "forgery/errors.hpp"

namespace forgery {

using nlohmann::json;

PhaseConfig PhaseConfig::dev() { return {PhaseName::dev, 1000, 4, 7 * 24 * 3600.0, 2.5 * 3600.0}; }

PhaseConfig PhaseConfig::final() { return {PhaseName::final, 3000, 2, 0.0, 7.5 * 3600.0}; }

std::string_view to_string(PhaseName phase) { return phase == PhaseName::dev ? "dev" : "final"; }

PhaseConfig parse_phase(std::string_view name) {
  if (name == "dev") return PhaseConfig::dev();
  if (name == "final") return PhaseConfig::final();
  throw std::invalid_argument("unknown phase: " + std::string(name));
}

namespace {

void check_coverage(std::span<const PredictionRecord> preds, const GroundTruthSet& truth) {
  std::vector<std::string> missing, extra;
  std::set<std::string_view> seen;
  for (const auto& p : preds) {
    if (!seen.insert(p.video_id).second) throw std::invalid_argument("duplicate video_id in submission: " + p.video_id);
    if (!truth.labels.count(p.video_id)) extra.push_back(p.video_id);
  }
  for (const auto& [id, label] : truth.labels)
    if (!seen.count(id)) missing.push_back(id);
  if (missing.empty() && extra.empty()) return;

  std::string msg = "submission does not match ground truth";
  auto list = [&](const char* what, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    msg += std::string("; ") + what + ":";
    for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg += " " + ids[i];
    if (ids.size() > 20) msg += " ... (" + std::to_string(ids.size()) + " total)";
  };
  list("missing", missing);
  list("extra", extra);
  throw ValidationError(msg, std::move(missing), std::move(extra));
}

}  // namespace

double bce_loss(std::span<const PredictionRecord> preds, const GroundTruthSet& truth, double bound) {
  if (truth.labels.empty()) throw std::invalid_argument("ground truth is empty");
  if (!(bound > 0.0 && bound < 0.5)) throw std::invalid_argument("bound must be in (0, 0.5)");
  check_coverage(preds, truth);
  double sum = 0.0;
  for (const auto& p : preds) {
    if (!std::isfinite(p.score)) throw std::invalid_argument("score is not finite for " + p.video_id);
    const double q = std::clamp(p.score, bound, 1.0 - bound);
    const int y = truth.labels.at(p.video_id);
    sum += y == 1 ? std::log(q) : std::log1p(-q);
  }
  return -sum / static_cast<double>(truth.labels.size());
}

std::vector<LeaderboardEntry> rank_leaderboard(std::vector<LeaderboardEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    if (a.bce_loss != b.bce_loss) return a.bce_loss < b.bce_loss;
    return a.runtime_s < b.runtime_s;
  });
  return entries;
}

std::string format_leaderboard(std::span<const LeaderboardEntry> ranked) {
  std::size_t team_w = 4;
  for (const auto& e : ranked) team_w = std::max(team_w, e.team.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-7s  %-*s  %8s  %10s\n", "Ranking", static_cast<int>(team_w), "Team", "BCELoss",
                "Runtime");
  out << buf;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%-7zu  %-*s  %8.4f  %10.0f\n", i + 1, static_cast<int>(team_w),
                  ranked[i].team.c_str(), ranked[i].bce_loss, ranked[i].runtime_s);
    out << buf;
  }
  return out.str();
}

std::string format_leaderboard_jsonl(std::span<const LeaderboardEntry> ranked) {
  std::string out;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    json row = {{"ranking", i + 1}, {"team", ranked[i].team}, {"bce_loss", ranked[i].bce_loss},
                {"runtime_s", ranked[i].runtime_s}};
    out += row.dump() + "\n";
  }
  return out;
}

// ---- quota ledger ----

QuotaLedger::QuotaLedger(std::filesystem::path path) : path_(std::move(path)) {}

std::vector<QuotaLedger::Entry> QuotaLedger::entries() const {
  std::vector<Entry> out;
  std::ifstream in(path_);
  if (!in) return out;  // no ledger yet
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string phase, team;
    std::int64_t t = 0;
    if (!(fields >> phase >> team >> t) || (phase != "dev" && phase != "final"))
      throw ParseError("malformed quota ledger line in " + path_.string(), lineno);
    out.push_back({phase == "dev" ? PhaseName::dev : PhaseName::final, team, t});
  }
  return out;
}

int QuotaLedger::used(const PhaseConfig& phase, const std::string& team, std::int64_t phase_start_s,
                      std::int64_t now_s) const {
  auto window_of = [&](std::int64_t t) -> std::int64_t {
    if (phase.quota_window_s <= 0) return 0;
    return static_cast<std::int64_t>(std::floor((t - phase_start_s) / phase.quota_window_s));
  };
  const std::int64_t current = window_of(now_s);
  int n = 0;
  for (const auto& e : entries())
    if (e.phase == phase.name && e.team == team && e.time_s >= phase_start_s && window_of(e.time_s) == current) ++n;
  return n;
}

void QuotaLedger::record(PhaseName phase, const std::string& team, std::int64_t time_s) {
  if (team.empty() || team.find_first_of(" \t\r\n") != std::string::npos)
    throw std::invalid_argument("team names in the ledger cannot be empty or contain whitespace");
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("cannot append to quota ledger: " + path_.string());
  out << to_string(phase) << ' ' << team << ' ' << time_s << '\n';
  if (!out) throw IoError("write failed: " + path_.string());
}

// ---- validation ----

bool ValidationReport::ok() const {
  return missing_ids.empty() && extra_ids.empty() && duplicate_ids.empty() && out_of_range_ids.empty() &&
         !wrong_video_count && !runtime_exceeded && !quota_exceeded;
}

std::vector<std::string> ValidationReport::messages() const {
  std::vector<std::string> out;
  auto ids = [&](const char* what, const std::vector<std::string>& v) {
    if (v.empty()) return;
    std::string m = std::to_string(v.size()) + " " + what + ":";
    for (std::size_t i = 0; i < v.size() && i < 10; ++i) m += " " + v[i];
    if (v.size() > 10) m += " ...";
    out.push_back(m);
  };
  ids("missing video ids", missing_ids);
  ids("unexpected video ids", extra_ids);
  ids("duplicate video ids", duplicate_ids);
  ids("scores outside [0,1]", out_of_range_ids);
  if (wrong_video_count) out.push_back("ground truth size does not match the phase's video count");
  if (runtime_exceeded) out.push_back("runtime limit exceeded");
  if (quota_exceeded) out.push_back("evaluation quota exhausted");
  return out;
}

ValidationReport validate_submission(std::span<const PredictionRecord> preds, const GroundTruthSet& truth,
                                     const PhaseConfig& phase, double measured_runtime_s, const QuotaCheck& quota) {
  ValidationReport r;
  std::set<std::string> seen;
  for (const auto& p : preds) {
    if (!seen.insert(p.video_id).second) {
      r.duplicate_ids.push_back(p.video_id);
      continue;
    }
    if (!truth.labels.count(p.video_id)) r.extra_ids.push_back(p.video_id);
    if (!std::isfinite(p.score) || p.score < 0.0 || p.score > 1.0) r.out_of_range_ids.push_back(p.video_id);
  }
  for (const auto& [id, label] : truth.labels)
    if (!seen.count(id)) r.missing_ids.push_back(id);
  r.wrong_video_count = truth.size() != phase.n_videos;
  r.runtime_exceeded = measured_runtime_s > phase.runtime_limit_s;
  if (quota.ledger)
    r.quota_exceeded = quota.ledger->used(phase, quota.team, quota.phase_start_s, quota.now_s) >= phase.eval_quota;
  return r;
}

std::vector<LeaderboardSnapshot> simulate_challenge(std::vector<Submission> submissions, const GroundTruthSet& truth,
                                                    const PhaseConfig& phase, QuotaLedger& ledger,
                                                    std::int64_t phase_start_s, double bound) {
  std::stable_sort(submissions.begin(), submissions.end(),
                   [](const Submission& a, const Submission& b) { return a.time_s < b.time_s; });
  std::map<std::string, LeaderboardEntry> best;
  std::vector<LeaderboardSnapshot> history;
  for (const auto& sub : submissions) {
    LeaderboardSnapshot snap;
    snap.time_s = sub.time_s;
    snap.team = sub.team;
    snap.report = validate_submission(sub.predictions, truth, phase, sub.runtime_s,
                                      {&ledger, sub.team, phase_start_s, sub.time_s});
    if (snap.report.ok()) {
      ledger.record(phase.name, sub.team, sub.time_s);
      snap.bce_loss = bce_loss(sub.predictions, truth, bound);
      const LeaderboardEntry candidate{sub.team, snap.bce_loss, sub.runtime_s};
      auto it = best.find(sub.team);
      if (it == best.end()) {
        best.emplace(sub.team, candidate);
      } else {
        const auto ranked = rank_leaderboard({it->second, candidate});
        if (ranked.front().bce_loss != it->second.bce_loss || ranked.front().runtime_s != it->second.runtime_s)
          it->second = candidate;
      }
    }
    std::vector<LeaderboardEntry> rows;
    for (const auto& [team, entry] : best) rows.push_back(entry);
    snap.ranking = rank_leaderboard(std::move(rows));
    history.push_back(std::move(snap));
  }
  return history;
}

// ---- files ----

std::string format_prediction_line(const PredictionRecord& rec) {
  char score[64];
  std::snprintf(score, sizeof score, "%.6f", rec.score);
  return "{\"video_id\": " + json(rec.video_id).dump() + ", \"score\": " + score + "}";
}

void write_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> preds) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write predictions: " + path.string());
  for (const auto& p : preds) out << format_prediction_line(p) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

template <typename F>
void for_each_json_line(std::istream& in, const std::string& source, F&& f) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source + ": invalid JSON", lineno);
    }
    try {
      f(j, lineno);
    } catch (const json::exception& e) {
      throw ParseError(source + ": " + e.what(), lineno);
    }
  }
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<PredictionRecord> parse_predictions(std::istream& in, const std::string& source) {
  std::vector<PredictionRecord> out;
  for_each_json_line(in, source, [&](const json& j, std::size_t) {
    out.push_back({j.at("video_id").get<std::string>(), j.at("score").get<double>()});
  });
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_predictions(in, path.string());
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruthSet& truth) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write ground truth: " + path.string());
  for (const auto& [id, label] : truth.labels)
    out << "{\"video_id\": " << json(id).dump() << ", \"label\": " << label << "}\n";
  if (!out) throw IoError("write failed: " + path.string());
}

GroundTruthSet read_ground_truth(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  GroundTruthSet truth;
  for_each_json_line(in, path.string(), [&](const json& j, std::size_t lineno) {
    const auto id = j.at("video_id").get<std::string>();
    const int label = j.at("label").get<int>();
    if (label != 0 && label != 1) throw ParseError("label must be 0 or 1", lineno);
    if (!truth.labels.emplace(id, label).second) throw ParseError("duplicate video_id " + id, lineno);
  });
  return truth;
}

std::vector<LeaderboardEntry> read_leaderboard_entries(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<LeaderboardEntry> out;
  for_each_json_line(in, path.string(), [&](const json& j, std::size_t lineno) {
    LeaderboardEntry e{j.at("team").get<std::string>(), j.at("bce_loss").get<double>(),
                       j.at("runtime_s").get<double>()};
    if (!(e.bce_loss >= 0) || !(e.runtime_s >= 0)) throw ParseError("bce_loss and runtime_s must be >= 0", lineno);
    out.push_back(std::move(e));
  });
  return out;
}

}  // namespace forgery
