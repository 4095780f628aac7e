#include "cyclewarp/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cyclewarp {

std::string format_double(double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line,
                       const std::string& what) {
  throw std::invalid_argument(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& field, const std::string& path,
                    std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    fail(path, line, "cannot parse '" + field + "' as a number");
  return v;
}

std::int64_t parse_int(const std::string& field, const std::string& path,
                       std::size_t line) {
  std::int64_t v = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    fail(path, line, "cannot parse '" + field + "' as an integer");
  return v;
}

/// Lines of a text file with trailing '\r' stripped; final empty line
/// (from a trailing newline) dropped.
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
  return out;
}

}  // namespace

Signal read_signal_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) fail(path, 1, "empty file");
  if (lines[0] != "x,y") fail(path, 1, "expected header 'x,y', got '" + lines[0] + "'");
  std::vector<double> x, y;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto fields = split_line(lines[k]);
    if (fields.size() != 2) fail(path, k + 1, "expected 2 columns");
    x.push_back(parse_double(fields[0], path, k + 1));
    y.push_back(parse_double(fields[1], path, k + 1));
  }
  if (x.size() < 2) fail(path, lines.size(), "need at least 2 samples");
  try {
    return Signal(std::move(x), std::move(y));
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::vector<std::pair<std::int64_t, Signal>> read_segments_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) fail(path, 1, "empty file");
  if (lines[0] != "segment,x,y")
    fail(path, 1, "expected header 'segment,x,y', got '" + lines[0] + "'");

  std::vector<std::pair<std::int64_t, Signal>> out;
  std::vector<std::int64_t> seen;
  std::vector<double> x, y;
  std::int64_t cur = 0;
  bool open = false;

  const auto flush = [&](std::size_t line_no) {
    if (!open) return;
    if (x.size() < 2)
      fail(path, line_no, "segment " + std::to_string(cur) + " has fewer than 2 samples");
    try {
      out.emplace_back(cur, Signal(std::move(x), std::move(y)));
    } catch (const std::exception& e) {
      throw std::invalid_argument(path + ": segment " + std::to_string(cur) + ": " +
                                  e.what());
    }
    x.clear();
    y.clear();
  };

  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto fields = split_line(lines[k]);
    if (fields.size() != 3) fail(path, k + 1, "expected 3 columns");
    const std::int64_t id = parse_int(fields[0], path, k + 1);
    if (!open || id != cur) {
      flush(k + 1);
      for (std::int64_t s : seen)
        if (s == id)
          fail(path, k + 1,
               "segment " + std::to_string(id) + " appears in two separate blocks");
      seen.push_back(id);
      cur = id;
      open = true;
    }
    x.push_back(parse_double(fields[1], path, k + 1));
    y.push_back(parse_double(fields[2], path, k + 1));
  }
  flush(lines.size() + 1);
  if (out.empty()) fail(path, lines.size(), "no segments");
  return out;
}

void write_signal_csv(const std::string& path, const Signal& s) {
  std::ofstream out = open_out(path);
  out << "x,y\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << format_double(s.x[i]) << ',' << format_double(s.y[i]) << '\n';
}

void write_segments_csv(const std::string& path,
                        const std::vector<std::pair<std::int64_t, Signal>>& segments) {
  std::ofstream out = open_out(path);
  out << "segment,x,y\n";
  for (const auto& [id, s] : segments)
    for (std::size_t i = 0; i < s.size(); ++i)
      out << id << ',' << format_double(s.x[i]) << ',' << format_double(s.y[i])
          << '\n';
}

void write_path_csv(const std::string& path, const GrowthPath& gp) {
  std::ofstream out = open_out(path);
  out << "x,xi,g\n";
  for (std::size_t i = 0; i < gp.xi.size(); ++i)
    out << format_double(static_cast<double>(i) * gp.delta) << ','
        << format_double(gp.xi[i]) << ',' << format_double(gp.g[i]) << '\n';
}

void write_fitted_csv(const std::string& path, const Signal& s, const FitResult& fit) {
  std::ofstream out = open_out(path);
  out << "x,y,yhat,g\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << format_double(s.x[i]) << ',' << format_double(s.y[i]) << ','
        << format_double(fit.fitted[i]) << ',' << format_double(fit.path.g[i])
        << '\n';
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::ofstream out = open_out(path);
  out << "iter,A,B,b,a,beta,rho,omega2,sigma2,loglik,ess_min,alpha,w,rel_change,"
         "converged_streak\n";
  for (const auto& r : trace)
    out << r.iter << ',' << format_double(r.A) << ',' << format_double(r.B) << ','
        << format_double(r.b) << ',' << format_double(r.a) << ','
        << format_double(r.beta) << ',' << format_double(r.rho) << ','
        << format_double(r.omega2) << ',' << format_double(r.sigma2) << ','
        << format_double(r.loglik) << ',' << format_double(r.ess_min) << ','
        << format_double(r.alpha) << ',' << format_double(r.w) << ','
        << format_double(r.rel_change) << ',' << r.converged_streak << '\n';
}

void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRow>& rows) {
  std::ofstream out = open_out(path);
  out << "index,x,residual,qq_theoretical,qq_empirical\n";
  for (const auto& r : rows)
    out << r.index << ',' << format_double(r.x) << ',' << format_double(r.residual)
        << ',' << format_double(r.qq_theoretical) << ','
        << format_double(r.qq_empirical) << '\n';
}

void write_bootstrap_csv(const std::string& path, const BootstrapResult& r) {
  std::ofstream out = open_out(path);
  out << "replicate,key,converged,A,B,b,a,beta,rho,omega2,sigma2,cycles\n";
  for (const auto& e : r.estimates)
    out << e.replicate << ',' << e.key << ',' << (e.converged ? 1 : 0) << ','
        << format_double(e.theta.A) << ',' << format_double(e.theta.B) << ','
        << format_double(e.theta.b) << ',' << format_double(e.theta.a) << ','
        << format_double(e.theta.beta) << ',' << format_double(e.theta.rho) << ','
        << format_double(e.theta.omega2) << ',' << format_double(e.theta.sigma2)
        << ',' << format_double(e.cycles) << '\n';
}

void write_reldiff_csv(const std::string& path, const std::vector<RelDiffRow>& rows) {
  std::ofstream out = open_out(path);
  out << "replicate,A,B,b,a,beta,rho,omega2,sigma2,cycles\n";
  for (const auto& r : rows)
    out << r.replicate << ',' << format_double(r.A) << ',' << format_double(r.B)
        << ',' << format_double(r.b) << ',' << format_double(r.a) << ','
        << format_double(r.beta) << ',' << format_double(r.rho) << ','
        << format_double(r.omega2) << ',' << format_double(r.sigma2) << ','
        << format_double(r.cycles) << '\n';
}

void write_timeline_csv(const std::string& path, const AggregateResult& agg) {
  std::ofstream out = open_out(path);
  out << "segment,index,x,y,g,year\n";
  for (const auto& r : agg.rows)
    out << r.segment << ',' << r.index << ',' << format_double(r.x) << ','
        << format_double(r.y) << ',' << format_double(r.g) << ','
        << format_double(r.year) << '\n';
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out = open_out(path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cyclewarp
