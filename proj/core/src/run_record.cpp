#include "fop/run_record.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fop/error.hpp"

namespace fop {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

constexpr const char* kMagic = "fop-run";

void append_mat_row(std::string& out, const char* tag, const Mat& m) {
  out += tag;
  out += ',';
  out += std::to_string(m.rows());
  out += ',';
  out += std::to_string(m.cols());
  for (double v : m.values()) {
    out += ',';
    out += format_double(v);
  }
  out += '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw FormatError("run record: bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str()) throw FormatError("run record: bad integer '" + s + "'");
  return v;
}

Mat parse_mat_row(const std::vector<std::string>& fields) {
  if (fields.size() < 3) throw FormatError("run record: short matrix row");
  const std::size_t rows = parse_u64(fields[1]);
  const std::size_t cols = parse_u64(fields[2]);
  if (fields.size() != 3 + rows * cols) {
    throw FormatError("run record: matrix row length mismatch");
  }
  Vec v(rows * cols);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = parse_double(fields[3 + i]);
  return Mat(rows, cols, std::move(v));
}

}  // namespace

std::string run_record_to_string(const RunRecord& r) {
  std::string out;
  out += kMagic;
  out += ' ' + std::to_string(r.version_major) + '.' +
         std::to_string(r.version_minor) + '\n';
  out += r.config_json;
  out += '\n';

  out += "[series]\n";
  const std::size_t theta_dim = r.series.empty() ? 0 : r.series.front().theta.size();
  out += "t,loss,grad_norm,rot_angle";
  for (std::size_t i = 0; i < theta_dim; ++i) out += ",theta" + std::to_string(i);
  out += '\n';
  for (const SeriesPoint& p : r.series) {
    if (p.theta.size() != theta_dim) {
      throw ContractViolation("run record: inconsistent theta dimensions in series");
    }
    out += std::to_string(p.t);
    out += ',';
    out += format_double(p.loss);
    out += ',';
    out += format_double(p.grad_norm);
    out += ',';
    out += format_double(p.rot_angle);
    for (double v : p.theta) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }

  out += "[evals]\n";
  out += "t,test_accuracy,train_loss\n";
  for (const EvalPoint& e : r.evals) {
    out += std::to_string(e.t) + ',' + format_double(e.test_accuracy) + ',' +
           format_double(e.train_loss) + '\n';
  }

  out += "[psnapshots]\n";
  for (const PSnapshot& s : r.psnapshots) {
    out += "snap," + std::to_string(s.t) + ',' + std::to_string(s.layer) + ',' +
           s.mode + '\n';
    append_mat_row(out, "m", s.m);
    if (!s.hyper_m.empty()) append_mat_row(out, "hm", s.hyper_m);
    if (!s.hyper_v.empty()) append_mat_row(out, "hv", s.hyper_v);
  }

  out += "[summary]\n";
  out += std::string("converged,") + (r.summary.converged ? "true" : "false") + '\n';
  out += "iterations," + std::to_string(r.summary.iterations) + '\n';
  out += "final_loss," + format_double(r.summary.final_loss) + '\n';
  out += "final_grad_norm," + format_double(r.summary.final_grad_norm) + '\n';
  out += "final_accuracy," + format_double(r.summary.final_accuracy) + '\n';
  out += "wall_clock_ms," + format_double(r.summary.wall_clock_ms) + '\n';
  out += "exit_reason," + r.summary.exit_reason + '\n';
  return out;
}

RunRecord run_record_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("run record: empty input");
  std::istringstream head(line);
  std::string magic, version;
  head >> magic >> version;
  if (magic != kMagic) throw FormatError("run record: bad header '" + line + "'");
  const std::size_t dotpos = version.find('.');
  if (dotpos == std::string::npos) {
    throw FormatError("run record: bad version '" + version + "'");
  }
  RunRecord r;
  r.version_major = std::atoi(version.substr(0, dotpos).c_str());
  r.version_minor = std::atoi(version.substr(dotpos + 1).c_str());
  if (r.version_major != RunRecord{}.version_major) {
    throw FormatError("run record: unsupported major version " +
                      std::to_string(r.version_major) + " (reader supports " +
                      std::to_string(RunRecord{}.version_major) + ".x)");
  }
  if (!std::getline(in, r.config_json)) {
    throw FormatError("run record: missing config line");
  }

  enum class Section { None, Series, Evals, Snapshots, Summary };
  Section section = Section::None;
  bool series_header_seen = false, evals_header_seen = false;
  PSnapshot* open_snap = nullptr;

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line == "[series]") { section = Section::Series; continue; }
    if (line == "[evals]") { section = Section::Evals; continue; }
    if (line == "[psnapshots]") { section = Section::Snapshots; continue; }
    if (line == "[summary]") { section = Section::Summary; continue; }

    std::vector<std::string> f = split_csv(line);
    switch (section) {
      case Section::None:
        throw FormatError("run record: content before first section: " + line);
      case Section::Series: {
        if (!series_header_seen) { series_header_seen = true; break; }
        if (f.size() < 4) throw FormatError("run record: short series row");
        SeriesPoint p;
        p.t = parse_u64(f[0]);
        p.loss = parse_double(f[1]);
        p.grad_norm = parse_double(f[2]);
        p.rot_angle = parse_double(f[3]);
        for (std::size_t i = 4; i < f.size(); ++i) {
          p.theta.push_back(parse_double(f[i]));
        }
        r.series.push_back(std::move(p));
        break;
      }
      case Section::Evals: {
        if (!evals_header_seen) { evals_header_seen = true; break; }
        if (f.size() != 3) throw FormatError("run record: bad eval row");
        EvalPoint e;
        e.t = parse_u64(f[0]);
        e.test_accuracy = parse_double(f[1]);
        e.train_loss = parse_double(f[2]);
        r.evals.push_back(e);
        break;
      }
      case Section::Snapshots: {
        if (f[0] == "snap") {
          if (f.size() != 4) throw FormatError("run record: bad snapshot header");
          PSnapshot s;
          s.t = parse_u64(f[1]);
          s.layer = parse_u64(f[2]);
          s.mode = f[3];
          r.psnapshots.push_back(std::move(s));
          open_snap = &r.psnapshots.back();
        } else if (f[0] == "m" || f[0] == "hm" || f[0] == "hv") {
          if (open_snap == nullptr) {
            throw FormatError("run record: matrix row outside a snapshot");
          }
          Mat m = parse_mat_row(f);
          if (f[0] == "m") open_snap->m = std::move(m);
          else if (f[0] == "hm") open_snap->hyper_m = std::move(m);
          else open_snap->hyper_v = std::move(m);
        } else {
          throw FormatError("run record: unknown snapshot row '" + f[0] + "'");
        }
        break;
      }
      case Section::Summary: {
        if (f.size() != 2) throw FormatError("run record: bad summary row");
        const std::string& k = f[0];
        if (k == "converged") r.summary.converged = (f[1] == "true");
        else if (k == "iterations") r.summary.iterations = parse_u64(f[1]);
        else if (k == "final_loss") r.summary.final_loss = parse_double(f[1]);
        else if (k == "final_grad_norm") r.summary.final_grad_norm = parse_double(f[1]);
        else if (k == "final_accuracy") r.summary.final_accuracy = parse_double(f[1]);
        else if (k == "wall_clock_ms") r.summary.wall_clock_ms = parse_double(f[1]);
        else if (k == "exit_reason") r.summary.exit_reason = f[1];
        else throw FormatError("run record: unknown summary key '" + k + "'");
        break;
      }
    }
  }
  return r;
}

void write_run_record(const RunRecord& r, const std::string& path) {
  namespace fs = std::filesystem;
  const std::string text = run_record_to_string(r);
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("write_run_record: cannot open " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw FormatError("write_run_record: write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

RunRecord read_run_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("read_run_record: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return run_record_from_string(buf.str());
}

}  // namespace fop
