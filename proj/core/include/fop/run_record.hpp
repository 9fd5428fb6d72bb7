#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "fop/mat.hpp"

namespace fop {

struct SeriesPoint {
  std::uint64_t t = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  // Angle between g and Pg in degrees; NaN when no preconditioner is active.
  double rot_angle = std::numeric_limits<double>::quiet_NaN();
  Vec theta;  // recorded only for dim <= 4
};

struct EvalPoint {
  std::uint64_t t = 0;
  double test_accuracy = 0.0;
  double train_loss = 0.0;
};

struct PSnapshot {
  std::uint64_t t = 0;
  std::size_t layer = 0;
  std::string mode;  // full | lowrank | normalized | stabilized
  Mat m;
  Mat hyper_m;  // empty unless Adam-on-M
  Mat hyper_v;
};

struct RunSummary {
  bool converged = false;
  std::uint64_t iterations = 0;
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
  double final_accuracy = std::numeric_limits<double>::quiet_NaN();
  double wall_clock_ms = 0.0;  // the only nondeterministic field
  std::string exit_reason;     // converged | cap | diverged
};

struct RunRecord {
  int version_major = 1;
  int version_minor = 0;
  std::string config_json;  // canonical single-line echo; replays the run
  std::vector<SeriesPoint> series;
  std::vector<EvalPoint> evals;
  std::vector<PSnapshot> psnapshots;
  RunSummary summary;
};

std::string run_record_to_string(const RunRecord& r);
RunRecord run_record_from_string(const std::string& text);

// Atomic: temp file in the target directory, then rename.
void write_run_record(const RunRecord& r, const std::string& path);
// Rejects any major version other than the current one.
RunRecord read_run_record(const std::string& path);

// %.17g, so doubles round-trip exactly.
std::string format_double(double v);

}  // namespace fop
