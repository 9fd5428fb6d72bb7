#include "fop/run_record.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "fop/error.hpp"

namespace fop {
namespace {

RunRecord sample_record() {
  RunRecord r;
  r.config_json = R"({"command":"toy","objective":"booth","seed":0})";
  SeriesPoint p1;
  p1.t = 1;
  p1.loss = 74.0;
  p1.grad_norm = 152.69577597171834;
  p1.theta = {-4.0, -4.0};
  SeriesPoint p2;
  p2.t = 2;
  p2.loss = 0.1;
  p2.grad_norm = 1e-300;
  p2.rot_angle = 44.725;
  p2.theta = {0.3333333333333333, 0.1};
  r.series = {p1, p2};
  r.evals = {{0, 0.1, 2.3025850929940457}, {20, 0.85, 0.4}};
  PSnapshot s;
  s.t = 0;
  s.layer = 2;
  s.mode = "lowrank";
  s.m = Mat::from_rows({{0.01, -0.02}, {0.03, 0.04}, {3.141592653589793, 0.0}});
  s.hyper_m = Mat::from_rows({{1e-8, 2e-8}, {0, 0}, {0, 0}});
  s.hyper_v = Mat::from_rows({{1e-16, 0}, {0, 0}, {0, 0}});
  r.psnapshots = {s};
  r.summary.converged = true;
  r.summary.iterations = 67;
  r.summary.final_loss = 4.9406564584124654e-324;  // denormal min
  r.summary.final_grad_norm = 9.9e-7;
  r.summary.wall_clock_ms = 12.5;
  r.summary.exit_reason = "converged";
  return r;
}

TEST(RunRecord, StringRoundTripPreservesEverything) {
  RunRecord r = sample_record();
  RunRecord b = run_record_from_string(run_record_to_string(r));

  EXPECT_EQ(b.version_major, 1);
  EXPECT_EQ(b.version_minor, 0);
  EXPECT_EQ(b.config_json, r.config_json);

  ASSERT_EQ(b.series.size(), 2u);
  EXPECT_EQ(b.series[0].t, 1u);
  EXPECT_EQ(b.series[0].loss, 74.0);
  EXPECT_EQ(b.series[0].grad_norm, r.series[0].grad_norm);
  EXPECT_TRUE(std::isnan(b.series[0].rot_angle));  // default NaN survives
  ASSERT_EQ(b.series[0].theta.size(), 2u);
  EXPECT_EQ(b.series[0].theta[0], -4.0);
  EXPECT_EQ(b.series[1].rot_angle, 44.725);
  EXPECT_EQ(b.series[1].grad_norm, 1e-300);
  EXPECT_EQ(b.series[1].theta[0], r.series[1].theta[0]);

  ASSERT_EQ(b.evals.size(), 2u);
  EXPECT_EQ(b.evals[1].t, 20u);
  EXPECT_EQ(b.evals[1].test_accuracy, 0.85);
  EXPECT_EQ(b.evals[0].train_loss, r.evals[0].train_loss);

  ASSERT_EQ(b.psnapshots.size(), 1u);
  const PSnapshot& s = b.psnapshots[0];
  EXPECT_EQ(s.t, 0u);
  EXPECT_EQ(s.layer, 2u);
  EXPECT_EQ(s.mode, "lowrank");
  ASSERT_EQ(s.m.rows(), 3u);
  ASSERT_EQ(s.m.cols(), 2u);
  for (std::size_t i = 0; i < s.m.size(); ++i)
    EXPECT_EQ(s.m.values()[i], r.psnapshots[0].m.values()[i]);
  for (std::size_t i = 0; i < s.hyper_m.size(); ++i)
    EXPECT_EQ(s.hyper_m.values()[i], r.psnapshots[0].hyper_m.values()[i]);
  for (std::size_t i = 0; i < s.hyper_v.size(); ++i)
    EXPECT_EQ(s.hyper_v.values()[i], r.psnapshots[0].hyper_v.values()[i]);

  EXPECT_TRUE(b.summary.converged);
  EXPECT_EQ(b.summary.iterations, 67u);
  EXPECT_EQ(b.summary.final_loss, r.summary.final_loss);
  EXPECT_EQ(b.summary.final_grad_norm, 9.9e-7);
  EXPECT_EQ(b.summary.wall_clock_ms, 12.5);
  EXPECT_EQ(b.summary.exit_reason, "converged");
}

TEST(RunRecord, SnapshotWithoutHyperBuffersStaysEmpty) {
  RunRecord r = sample_record();
  r.psnapshots[0].hyper_m = Mat();
  r.psnapshots[0].hyper_v = Mat();
  RunRecord b = run_record_from_string(run_record_to_string(r));
  EXPECT_TRUE(b.psnapshots[0].hyper_m.empty());
  EXPECT_TRUE(b.psnapshots[0].hyper_v.empty());
}

TEST(RunRecord, SerializationIsByteDeterministic) {
  RunRecord r = sample_record();
  EXPECT_EQ(run_record_to_string(r), run_record_to_string(r));

  // Wall-clock is the only field allowed to differ between reruns; changing
  // it must change exactly one line.
  RunRecord r2 = sample_record();
  r2.summary.wall_clock_ms = 99.0;
  std::string a = run_record_to_string(r), b = run_record_to_string(r2);
  std::size_t diff_lines = 0;
  std::size_t apos = 0, bpos = 0;
  while (apos < a.size() && bpos < b.size()) {
    std::size_t ae = a.find('\n', apos), be = b.find('\n', bpos);
    ASSERT_NE(ae, std::string::npos);
    ASSERT_NE(be, std::string::npos);
    diff_lines += a.substr(apos, ae - apos) != b.substr(bpos, be - bpos);
    apos = ae + 1;
    bpos = be + 1;
  }
  EXPECT_EQ(diff_lines, 1u);
}

TEST(RunRecord, FormatDoubleRoundTripsExactly) {
  const double vals[] = {0.1,
                         1.0 / 3.0,
                         -1.7976931348623157e308,
                         4.9406564584124654e-324,
                         3.141592653589793,
                         -0.0,
                         1e300};
  for (double v : vals) {
    const std::string s = format_double(v);
    char* end = nullptr;
    EXPECT_EQ(std::strtod(s.c_str(), &end), v) << s;
  }
}

TEST(RunRecord, FileRoundTripAndAtomicWrite) {
  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() / "fop_t_runrecord.run";
  RunRecord r = sample_record();
  write_run_record(r, p.string());
  EXPECT_TRUE(fs::exists(p));
  EXPECT_FALSE(fs::exists(p.string() + ".tmp"));  // temp renamed away
  RunRecord b = read_run_record(p.string());
  EXPECT_EQ(run_record_to_string(b), run_record_to_string(r));
  fs::remove(p);
}

TEST(RunRecord, RejectsMalformedInput) {
  EXPECT_THROW(run_record_from_string(""), FormatError);
  EXPECT_THROW(run_record_from_string("not a record\n{}\n"), FormatError);

  // Major version bump is a hard error; minor bump is accepted.
  RunRecord r = sample_record();
  std::string good = run_record_to_string(r);
  std::string major = good;
  major.replace(major.find("1.0"), 3, "2.0");
  EXPECT_THROW(run_record_from_string(major), FormatError);
  std::string minor = good;
  minor.replace(minor.find("1.0"), 3, "1.7");
  EXPECT_NO_THROW(run_record_from_string(minor));

  // Content before any section header.
  EXPECT_THROW(run_record_from_string("fop-run 1.0\n{}\nstray,1,2\n"), FormatError);
  // Unknown summary key.
  EXPECT_THROW(run_record_from_string("fop-run 1.0\n{}\n[summary]\nbogus,1\n"),
               FormatError);
  // Bad numbers in a series row.
  EXPECT_THROW(run_record_from_string(
                   "fop-run 1.0\n{}\n[series]\nt,loss,grad_norm,rot_angle\n"
                   "1,abc,2,3\n"),
               FormatError);
  // Matrix row outside a snapshot.
  EXPECT_THROW(
      run_record_from_string("fop-run 1.0\n{}\n[psnapshots]\nm,1,1,0.5\n"),
      FormatError);
  // Matrix row with wrong element count.
  EXPECT_THROW(run_record_from_string(
                   "fop-run 1.0\n{}\n[psnapshots]\nsnap,0,0,full\nm,2,2,1,2,3\n"),
               FormatError);
}

TEST(RunRecord, ReadMissingFileThrows) {
  EXPECT_THROW(read_run_record("/nonexistent/path.run"), FormatError);
}

}  // namespace
}  // namespace fop
