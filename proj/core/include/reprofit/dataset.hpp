#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace reprofit {

/// Error raised while reading a tabular input; line is 1-based (0 = header
/// missing / not attributable to a line).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, std::size_t line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg
                                      : std::move(msg)),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Daily (or coarser) parent-survival record for one replicate.
/// Times are strictly increasing starting at 0; counts never increase.
struct SurvivalSeries {
    std::string replicate_id;
    double concentration = 0.0;
    std::vector<std::pair<double, long>> observations;  // (time in days, n_alive)

    long initial_count() const { return observations.front().second; }
    long final_count() const { return observations.back().second; }
};

/// Cumulative offspring total for one replicate at test end.
struct ReproductionRecord {
    std::string replicate_id;
    double concentration = 0.0;
    long n_offspring = 0;
};

/// One analysis-ready replicate: concentration C, offspring total N and the
/// individual-days covariate NID.
struct ReplicateDatum {
    std::string replicate_id;
    double concentration = 0.0;
    long n_offspring = 0;
    double nid = 0.0;
    bool had_mortality = false;
};

struct BioassayDataset {
    std::vector<ReplicateDatum> replicates;
    double test_duration = 0.0;
    std::string concentration_unit;
};

/// Parses `replicate,concentration,time,n_alive` CSV into per-replicate
/// series sorted by time. Throws ParseError on malformed rows, increasing
/// survivor counts, duplicate (replicate, time) pairs, or inconsistent
/// concentrations within a replicate.
std::vector<SurvivalSeries> parse_survival_table(std::istream& in);
std::vector<SurvivalSeries> parse_survival_file(const std::string& path);

/// Parses `replicate,concentration,n_offspring` CSV.
std::vector<ReproductionRecord> parse_reproduction_table(std::istream& in);
std::vector<ReproductionRecord> parse_reproduction_file(const std::string& path);

/// Individual-days for one replicate: every survivor contributes the full
/// test duration, every animal found dead at t_{i+1} (last seen alive at
/// t_i) contributes (t_i + t_{i+1}) / 2. Requires the series to end exactly
/// at test_duration; a missing final observation is an error, not imputed.
double compute_nid(const SurvivalSeries& series, double test_duration);

struct AssembledDataset {
    BioassayDataset dataset;
    std::vector<std::string> warnings;
};

/// Joins survival and reproduction tables one-to-one on replicate_id,
/// computes NID per replicate, and drops NID = 0 replicates with a warning
/// (they carry no exposure time). Throws on unmatched ids or concentration
/// mismatches.
AssembledDataset assemble_dataset(const std::vector<SurvivalSeries>& survival,
                                  const std::vector<ReproductionRecord>& repro,
                                  double test_duration,
                                  std::string concentration_unit = {});

/// Offspring per individual-day, N / NID.
double reproduction_rate(const ReplicateDatum& datum);

/// Distinct concentrations in ascending order.
std::vector<double> tested_concentrations(const BioassayDataset& data);

/// Canonical CSV forms: rows sorted by (concentration, replicate_id, time),
/// numbers in shortest round-trip notation. Parsing then serializing is a
/// fixed point byte-for-byte.
std::string to_survival_csv(std::vector<SurvivalSeries> series);
std::string to_reproduction_csv(std::vector<ReproductionRecord> records);

/// `replicate,concentration,nid,had_mortality` table for the nid command.
std::string to_nid_csv(const BioassayDataset& data);

/// Shortest round-trip decimal form of a double (canonical output format).
std::string format_double(double value);

/// FNV-1a 64-bit hex digest of a string (dataset fingerprint in reports).
std::string fnv1a_hex(const std::string& bytes);

}  // namespace reprofit
