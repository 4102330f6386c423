#include "amgan/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "amgan/error.hpp"

namespace amgan::io {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',' || c == ' ' || c == '\t' || c == '\r') {
      if (!field.empty()) out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (!field.empty()) out.push_back(std::move(field));
  return out;
}

double parse_real(const std::string& text, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError("not a number: '" + text + "'", line);
  }
  return v;
}

long long parse_integer(const std::string& text, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw ParseError("not an integer: '" + text + "'", line);
  }
  return v;
}

bool skippable(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> columns{
      "step",           "g_loss",
      "d_loss",         "inception_score",
      "am_score",       "mode_coverage",
      "intra_mode_dispersion", "d_r_mean_on_fake",
      "input_grad_l1",  "grad_check_rel_err",
      "identity_check_err"};
  return columns;
}

void write_trace_csv(std::ostream& out, const std::vector<Snapshot>& snapshots) {
  const auto& cols = trace_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const Snapshot& s : snapshots) {
    out << s.step << ',' << format_real(s.g_loss) << ',' << format_real(s.d_loss) << ','
        << format_real(s.inception_score) << ',' << format_real(s.am_score) << ','
        << s.mode_coverage << ',' << format_real(s.intra_mode_dispersion) << ','
        << format_real(s.d_r_mean_on_fake) << ',' << format_real(s.input_grad_l1) << ','
        << format_real(s.grad_check_rel_err) << ',' << format_real(s.identity_check_err)
        << '\n';
  }
}

std::vector<Snapshot> read_trace_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty trace file", line_no);
  if (split_fields(line) != trace_columns()) throw ParseError("unexpected trace header", line_no);
  std::vector<Snapshot> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto f = split_fields(line);
    if (f.size() != trace_columns().size()) {
      throw ParseError("expected " + std::to_string(trace_columns().size()) + " fields", line_no);
    }
    Snapshot s;
    s.step = static_cast<std::size_t>(parse_integer(f[0], line_no));
    s.g_loss = parse_real(f[1], line_no);
    s.d_loss = parse_real(f[2], line_no);
    s.inception_score = parse_real(f[3], line_no);
    s.am_score = parse_real(f[4], line_no);
    s.mode_coverage = static_cast<std::size_t>(parse_integer(f[5], line_no));
    s.intra_mode_dispersion = parse_real(f[6], line_no);
    s.d_r_mean_on_fake = parse_real(f[7], line_no);
    s.input_grad_l1 = parse_real(f[8], line_no);
    s.grad_check_rel_err = parse_real(f[9], line_no);
    s.identity_check_err = parse_real(f[10], line_no);
    out.push_back(s);
  }
  return out;
}

void write_sample_dump_csv(std::ostream& out, const TrainingTrace& trace,
                           const MixtureSpec& mixture) {
  out << "x,y,assigned_label,oracle_label\n";
  for (std::size_t i = 0; i < trace.final_samples.size(); ++i) {
    const Point2 p = trace.final_samples[i];
    const long long assigned =
        i < trace.final_assigned_labels.size() ? trace.final_assigned_labels[i] : -1;
    out << format_real(p.x) << ',' << format_real(p.y) << ',' << assigned << ','
        << argmax(oracle_posterior(mixture, p).values()) << '\n';
  }
}

std::vector<Point2> read_sample_dump_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty sample dump", line_no);
  const auto header = split_fields(line);
  if (header.size() < 2 || header[0] != "x" || header[1] != "y") {
    throw ParseError("sample dump must start with columns x,y", line_no);
  }
  std::vector<Point2> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) throw ParseError("wrong number of fields", line_no);
    out.push_back({parse_real(f[0], line_no), parse_real(f[1], line_no)});
  }
  if (out.empty()) throw ParseError("sample dump has no rows", line_no);
  return out;
}

ClassifierBatch read_classifier_batch(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t classes = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto f = split_fields(line);
    if (f.size() != 1 || f[0].rfind("K=", 0) != 0) {
      throw ParseError("expected header 'K=<int>'", line_no);
    }
    const long long k = parse_integer(f[0].substr(2), line_no);
    if (k < 1) throw ParseError("K must be positive", line_no);
    classes = static_cast<std::size_t>(k);
    break;
  }
  if (classes == 0) throw ParseError("missing header 'K=<int>'", line_no + 1);

  std::vector<double> flat;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto f = split_fields(line);
    if (f.size() != classes) {
      throw ParseError("expected " + std::to_string(classes) + " columns, got " +
                           std::to_string(f.size()),
                       line_no);
    }
    std::vector<double> row;
    row.reserve(classes);
    for (const auto& field : f) row.push_back(parse_real(field, line_no));
    try {
      const ProbVector checked(std::move(row));
      flat.insert(flat.end(), checked.values().begin(), checked.values().end());
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (flat.empty()) throw ParseError("batch file has no rows", line_no + 1);
  return ClassifierBatch(classes, std::move(flat));
}

void write_classifier_batch(std::ostream& out, const ClassifierBatch& batch) {
  out << "K=" << batch.classes() << '\n';
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto row = batch.row(r);
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_real(row[k]);
    out << '\n';
  }
}

std::string score_report_json(const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["inception_score"] = report.inception_score;
  j["log_inception_score"] = report.log_inception_score;
  j["marginal_entropy"] = report.marginal_entropy;
  j["mean_conditional_entropy"] = report.mean_conditional_entropy;
  j["decomposition_residual"] = decomposition_residual(report);
  if (report.mode_score) j["mode_score"] = *report.mode_score;
  if (report.am_score) j["am_score"] = *report.am_score;
  if (report.am_kl_term) j["am_kl_term"] = *report.am_kl_term;
  if (report.am_entropy_term) j["am_entropy_term"] = *report.am_entropy_term;
  j["train_dist_clamped"] = report.train_dist_clamped;
  return j.dump(2) + "\n";
}

void write_mode_drop_csv(std::ostream& out, const std::vector<ModeDropPoint>& series) {
  out << "kept,mean,min,max,std_error\n";
  for (const ModeDropPoint& p : series) {
    out << p.kept << ',' << format_real(p.mean) << ',' << format_real(p.min) << ','
        << format_real(p.max) << ',' << format_real(p.std_error) << '\n';
  }
}

}  // namespace amgan::io
