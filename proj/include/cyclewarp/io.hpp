#pragma once
// CSV readers and writers.  All floating-point output is printed with 17
// significant digits so values round-trip exactly and reruns are
// byte-identical; files are written in binary mode with '\n' line endings.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cyclewarp/aggregate.hpp"
#include "cyclewarp/bootstrap.hpp"
#include "cyclewarp/model.hpp"
#include "cyclewarp/saem.hpp"

namespace cyclewarp {

/// Fixed 17-significant-digit decimal form (round-trips any double).
std::string format_double(double v);

/// Read a two-column signal file with header "x,y".  Abscissae must be
/// equispaced.  Throws std::invalid_argument naming the file and 1-based
/// line on any malformed content.
Signal read_signal_csv(const std::string& path);

/// Read a labeled multi-segment file with header "segment,x,y".  Rows of
/// one segment must be contiguous; segments are returned in file order
/// with their labels.
std::vector<std::pair<std::int64_t, Signal>> read_segments_csv(const std::string& path);

void write_signal_csv(const std::string& path, const Signal& s);
void write_segments_csv(const std::string& path,
                        const std::vector<std::pair<std::int64_t, Signal>>& segments);

/// Trajectory file "x,xi,g" on the observation grid.
void write_path_csv(const std::string& path, const GrowthPath& gp);

/// Fit overlay "x,y,yhat,g".
void write_fitted_csv(const std::string& path, const Signal& s, const FitResult& fit);

/// Iteration trace, one row per iteration.
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

/// Residual and QQ diagnostics.
void write_diagnostics_csv(const std::string& path,
                           const std::vector<DiagnosticsRow>& rows);

/// Replicate estimate table "replicate,key,converged,A,B,b,a,beta,rho,omega2,sigma2,cycles".
void write_bootstrap_csv(const std::string& path, const BootstrapResult& r);

/// Replicate deviation table (see replicate_rel_diffs).
void write_reldiff_csv(const std::string& path, const std::vector<RelDiffRow>& rows);

/// Chained timeline "segment,index,x,y,g,year".
void write_timeline_csv(const std::string& path, const AggregateResult& agg);

/// Write a string to a file verbatim (binary mode).
void write_text_file(const std::string& path, const std::string& content);

/// Read an entire file into a string; throws std::invalid_argument if the
/// file cannot be opened.
std::string read_text_file(const std::string& path);

}  // namespace cyclewarp
