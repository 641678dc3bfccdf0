#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forgery {

struct PredictionRecord {
  std::string video_id;
  double score = 0.5;  // probability fake
};

/// video_id → label (1 fake, 0 real).
struct GroundTruthSet {
  std::map<std::string, int> labels;

  std::size_t size() const { return labels.size(); }
};

struct LeaderboardEntry {
  std::string team;
  double bce_loss = 0;
  double runtime_s = 0;
};

enum class PhaseName { dev, final };

struct PhaseConfig {
  PhaseName name = PhaseName::dev;
  std::size_t n_videos = 1000;
  int eval_quota = 4;            // per quota window
  double quota_window_s = 0;     // 0: quota counts over the whole phase
  double runtime_limit_s = 9000;

  static PhaseConfig dev();    // 1,000 videos, 4 evaluations / week, 2.5 h each
  static PhaseConfig final();  // 3,000 videos, 2 evaluations total, 7.5 h each
};

std::string_view to_string(PhaseName phase);
PhaseConfig parse_phase(std::string_view name);

inline constexpr double kDefaultBound = 0.01;

/// −(1/N) Σ [y ln p + (1−y) ln(1−p)], each p clamped to [bound, 1−bound] first. Throws
/// ValidationError when the submission's ids differ from the ground truth's, and
/// std::invalid_argument for an empty ground truth, a duplicate id, or a bound outside (0, 0.5).
double bce_loss(std::span<const PredictionRecord> preds, const GroundTruthSet& truth, double bound = kDefaultBound);

/// Ascending (bce_loss, runtime_s); entries tied on both keep their input order.
std::vector<LeaderboardEntry> rank_leaderboard(std::vector<LeaderboardEntry> entries);

/// Ranking/Team/BCELoss/Runtime table.
std::string format_leaderboard(std::span<const LeaderboardEntry> ranked);
/// Same rows as JSON lines with an explicit "ranking" field.
std::string format_leaderboard_jsonl(std::span<const LeaderboardEntry> ranked);

/// Append-only plain-text ledger of accepted evaluations: `phase team unix_seconds` lines.
/// Single writer.
class QuotaLedger {
 public:
  struct Entry {
    PhaseName phase;
    std::string team;
    std::int64_t time_s;
  };

  explicit QuotaLedger(std::filesystem::path path);
  const std::filesystem::path& path() const { return path_; }
  /// Entries currently on disk. Throws ParseError on malformed lines.
  std::vector<Entry> entries() const;
  /// Evaluations already used by `team` in the quota window containing `now_s`.
  int used(const PhaseConfig& phase, const std::string& team, std::int64_t phase_start_s, std::int64_t now_s) const;
  void record(PhaseName phase, const std::string& team, std::int64_t time_s);

 private:
  std::filesystem::path path_;
};

struct ValidationReport {
  std::vector<std::string> missing_ids;
  std::vector<std::string> extra_ids;
  std::vector<std::string> duplicate_ids;
  std::vector<std::string> out_of_range_ids;  // score outside [0,1] or not finite
  bool wrong_video_count = false;             // ground truth size differs from the phase's
  bool runtime_exceeded = false;
  bool quota_exceeded = false;

  bool ok() const;
  /// One line per failure; empty when ok().
  std::vector<std::string> messages() const;
};

struct QuotaCheck {
  const QuotaLedger* ledger = nullptr;  // null: quota not tracked
  std::string team;
  std::int64_t phase_start_s = 0;
  std::int64_t now_s = 0;
};

ValidationReport validate_submission(std::span<const PredictionRecord> preds, const GroundTruthSet& truth,
                                     const PhaseConfig& phase, double measured_runtime_s,
                                     const QuotaCheck& quota = {});

struct Submission {
  std::string team;
  std::int64_t time_s = 0;
  double runtime_s = 0;
  std::vector<PredictionRecord> predictions;
};

struct LeaderboardSnapshot {
  std::int64_t time_s = 0;
  std::string team;           // submitting team
  ValidationReport report;    // why a submission was rejected, if it was
  double bce_loss = 0;        // valid submissions only
  std::vector<LeaderboardEntry> ranking;  // each team's best valid submission
};

/// Replays submissions in time order (ties keep input order) through validation, the quota
/// ledger and scoring. One snapshot per submission.
std::vector<LeaderboardSnapshot> simulate_challenge(std::vector<Submission> submissions, const GroundTruthSet& truth,
                                                    const PhaseConfig& phase, QuotaLedger& ledger,
                                                    std::int64_t phase_start_s, double bound = kDefaultBound);

// ---- line-delimited JSON files ----

/// `{"video_id": "...", "score": 0.500000}` per line, six decimals.
std::string format_prediction_line(const PredictionRecord& rec);
void write_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> preds);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
std::vector<PredictionRecord> parse_predictions(std::istream& in, const std::string& source);

/// `{"video_id": "...", "label": 0|1}` per line. Throws ParseError on duplicates.
void write_ground_truth(const std::filesystem::path& path, const GroundTruthSet& truth);
GroundTruthSet read_ground_truth(const std::filesystem::path& path);

/// `{"team": "...", "bce_loss": x, "runtime_s": y}` per line.
std::vector<LeaderboardEntry> read_leaderboard_entries(const std::filesystem::path& path);

}  // namespace forgery
