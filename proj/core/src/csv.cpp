#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "kshift/sweep.hpp"

namespace kshift {

const char* const kCsvHeader =
    "seed_index,n,d,decay_a,lambda,weighting_mode,bias_sq,variance,excess_risk,"
    "mc_excess_risk,bound_variance_dominated,bound_variance_residual,bound_bias_in,"
    "bound_bias_iw,capacity_value,effective_dimension_q,gap_gram,wall_ms";

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require_finite(double v, const char* field) {
  if (!std::isfinite(v))
    throw DataError(std::string("emit_csv: non-finite value in field ") + field);
}

}  // namespace

void emit_csv(const std::vector<SweepRecord>& records, const std::string& path,
              bool with_timings) {
  if (records.empty()) throw DataError("emit_csv: no records");

  std::vector<const SweepRecord*> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [](const SweepRecord* a, const SweepRecord* b) {
    if (a->decay_a != b->decay_a) return a->decay_a < b->decay_a;
    if (a->n != b->n) return a->n < b->n;
    return a->seed_index < b->seed_index;
  });

  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const SweepRecord* r : rows) {
    require_finite(r->decay_a, "decay_a");
    require_finite(r->lambda, "lambda");
    require_finite(r->bias_sq, "bias_sq");
    require_finite(r->variance, "variance");
    require_finite(r->excess_risk, "excess_risk");
    if (r->mc_excess_risk) require_finite(*r->mc_excess_risk, "mc_excess_risk");
    require_finite(r->bound_variance_dominated, "bound_variance_dominated");
    require_finite(r->bound_variance_residual, "bound_variance_residual");
    require_finite(r->bound_bias_in, "bound_bias_in");
    require_finite(r->bound_bias_iw, "bound_bias_iw");
    require_finite(r->capacity_value, "capacity_value");
    require_finite(r->effective_dimension_q, "effective_dimension_q");
    require_finite(r->gap_gram, "gap_gram");
    require_finite(r->wall_ms, "wall_ms");

    out << r->seed_index << ',' << r->n << ',' << r->d << ','
        << format_double(r->decay_a) << ',' << format_double(r->lambda) << ','
        << r->weighting_mode << ',' << format_double(r->bias_sq) << ','
        << format_double(r->variance) << ',' << format_double(r->excess_risk) << ',';
    if (r->mc_excess_risk) out << format_double(*r->mc_excess_risk);
    out << ',' << format_double(r->bound_variance_dominated) << ','
        << format_double(r->bound_variance_residual) << ','
        << format_double(r->bound_bias_in) << ',' << format_double(r->bound_bias_iw)
        << ',' << format_double(r->capacity_value) << ','
        << format_double(r->effective_dimension_q) << ',' << format_double(r->gap_gram)
        << ',' << format_double(with_timings ? r->wall_ms : 0.0) << '\n';
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("emit_csv: cannot write " + path);
  file << out.str();
  if (!file) throw DataError("emit_csv: write failed for " + path);
}

void emit_error_csv(const std::vector<ErrorRow>& errors, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("emit_error_csv: cannot write " + path);
  file << "decay_a,n,seed_index,reason\n";
  for (const auto& e : errors)
    file << format_double(e.decay_a) << ',' << e.n << ',' << e.seed_index << ','
         << e.reason << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double_field(const std::string& s, const char* field, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw DataError("read_csv: bad " + std::string(field) + " at line " +
                    std::to_string(line_no));
  return v;
}

}  // namespace

std::vector<SweepRecord> read_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw DataError("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(file, line)) throw DataError("read_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw DataError("read_csv: header does not match the sweep schema in " + path);

  std::vector<SweepRecord> records;
  std::size_t line_no = 1;
  while (std::getline(file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 18)
      throw DataError("read_csv: expected 18 fields at line " + std::to_string(line_no));
    SweepRecord r;
    r.seed_index = static_cast<int>(parse_double_field(f[0], "seed_index", line_no));
    r.n = static_cast<Index>(parse_double_field(f[1], "n", line_no));
    r.d = static_cast<Index>(parse_double_field(f[2], "d", line_no));
    r.decay_a = parse_double_field(f[3], "decay_a", line_no);
    r.lambda = parse_double_field(f[4], "lambda", line_no);
    r.weighting_mode = f[5];
    r.bias_sq = parse_double_field(f[6], "bias_sq", line_no);
    r.variance = parse_double_field(f[7], "variance", line_no);
    r.excess_risk = parse_double_field(f[8], "excess_risk", line_no);
    if (!f[9].empty()) r.mc_excess_risk = parse_double_field(f[9], "mc_excess_risk", line_no);
    r.bound_variance_dominated =
        parse_double_field(f[10], "bound_variance_dominated", line_no);
    r.bound_variance_residual =
        parse_double_field(f[11], "bound_variance_residual", line_no);
    r.bound_bias_in = parse_double_field(f[12], "bound_bias_in", line_no);
    r.bound_bias_iw = parse_double_field(f[13], "bound_bias_iw", line_no);
    r.capacity_value = parse_double_field(f[14], "capacity_value", line_no);
    r.effective_dimension_q = parse_double_field(f[15], "effective_dimension_q", line_no);
    r.gap_gram = parse_double_field(f[16], "gap_gram", line_no);
    r.wall_ms = parse_double_field(f[17], "wall_ms", line_no);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace kshift
