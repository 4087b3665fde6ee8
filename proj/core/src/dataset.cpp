#include "reprofit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace reprofit {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto first = f.find_first_not_of(" \t");
        const auto last = f.find_last_not_of(" \t");
        f = (first == std::string::npos) ? std::string{} : f.substr(first, last - first + 1);
    }
    return fields;
}

double parse_real(const std::string& field, const char* what, std::size_t line) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw ParseError(std::string("cannot parse ") + what + " from '" + field + "'", line);
    }
    return value;
}

long parse_count(const std::string& field, const char* what, std::size_t line) {
    long value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(std::string("cannot parse ") + what + " from '" + field + "'", line);
    }
    if (value < 0) throw ParseError(std::string(what) + " is negative", line);
    return value;
}

void expect_header(const std::string& line, const std::vector<std::string>& expected) {
    const auto fields = split_csv_line(line);
    if (fields != expected) {
        std::string want;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) want += ',';
            want += expected[i];
        }
        throw ParseError("expected header '" + want + "'", 1);
    }
}

}  // namespace

std::vector<SurvivalSeries> parse_survival_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty input", 0);
    expect_header(line, {"replicate", "concentration", "time", "n_alive"});

    // Keep first-seen order per replicate, sort observations by time later.
    std::vector<SurvivalSeries> series;
    std::map<std::string, std::size_t> index;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), lineno);
        const std::string& id = fields[0];
        if (id.empty()) throw ParseError("empty replicate id", lineno);
        const double conc = parse_real(fields[1], "concentration", lineno);
        if (conc < 0.0) throw ParseError("concentration is negative", lineno);
        const double time = parse_real(fields[2], "time", lineno);
        if (time < 0.0) throw ParseError("time is negative", lineno);
        const long alive = parse_count(fields[3], "n_alive", lineno);

        auto [it, inserted] = index.try_emplace(id, series.size());
        if (inserted) {
            series.push_back(SurvivalSeries{id, conc, {}});
        } else if (series[it->second].concentration != conc) {
            throw ParseError("replicate '" + id + "' listed at different concentrations", lineno);
        }
        series[it->second].observations.emplace_back(time, alive);
    }
    if (series.empty()) throw ParseError("no data rows", 0);

    for (auto& s : series) {
        std::sort(s.observations.begin(), s.observations.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < s.observations.size(); ++i) {
            if (s.observations[i].first == s.observations[i - 1].first) {
                throw ParseError("duplicate time " + format_double(s.observations[i].first) +
                                     " for replicate '" + s.replicate_id + "'",
                                 0);
            }
            if (s.observations[i].second > s.observations[i - 1].second) {
                throw ParseError("survivors increased over time for replicate '" + s.replicate_id + "'", 0);
            }
        }
        if (s.observations.front().first != 0.0) {
            throw ParseError("replicate '" + s.replicate_id + "' has no observation at time 0", 0);
        }
    }
    return series;
}

std::vector<ReproductionRecord> parse_reproduction_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty input", 0);
    expect_header(line, {"replicate", "concentration", "n_offspring"});

    std::vector<ReproductionRecord> records;
    std::set<std::string> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) throw ParseError("expected 3 fields, got " + std::to_string(fields.size()), lineno);
        const std::string& id = fields[0];
        if (id.empty()) throw ParseError("empty replicate id", lineno);
        if (!seen.insert(id).second) throw ParseError("duplicate replicate '" + id + "'", lineno);
        const double conc = parse_real(fields[1], "concentration", lineno);
        if (conc < 0.0) throw ParseError("concentration is negative", lineno);
        const long n = parse_count(fields[2], "n_offspring", lineno);
        records.push_back(ReproductionRecord{id, conc, n});
    }
    if (records.empty()) throw ParseError("no data rows", 0);
    return records;
}

namespace {

template <typename T>
T parse_from_file(const std::string& path, T (*parse)(std::istream&)) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return parse(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
}

}  // namespace

std::vector<SurvivalSeries> parse_survival_file(const std::string& path) {
    return parse_from_file(path, parse_survival_table);
}

std::vector<ReproductionRecord> parse_reproduction_file(const std::string& path) {
    return parse_from_file(path, parse_reproduction_table);
}

double compute_nid(const SurvivalSeries& series, double test_duration) {
    if (series.observations.empty()) throw std::invalid_argument("empty survival series");
    if (series.observations.back().first != test_duration) {
        throw std::invalid_argument("replicate '" + series.replicate_id +
                                    "' has no observation at test end (last time " +
                                    format_double(series.observations.back().first) + ", expected " +
                                    format_double(test_duration) + ")");
    }
    // Survivors contribute the full duration; each death in (t_i, t_{i+1}]
    // contributes the interval midpoint.
    double nid = static_cast<double>(series.final_count()) * test_duration;
    for (std::size_t i = 1; i < series.observations.size(); ++i) {
        const long deaths = series.observations[i - 1].second - series.observations[i].second;
        if (deaths > 0) {
            const double midpoint = 0.5 * (series.observations[i - 1].first + series.observations[i].first);
            nid += static_cast<double>(deaths) * midpoint;
        }
    }
    return nid;
}

AssembledDataset assemble_dataset(const std::vector<SurvivalSeries>& survival,
                                  const std::vector<ReproductionRecord>& repro,
                                  double test_duration,
                                  std::string concentration_unit) {
    std::map<std::string, const SurvivalSeries*> by_id;
    for (const auto& s : survival) by_id[s.replicate_id] = &s;
    if (by_id.size() != survival.size()) throw std::invalid_argument("duplicate replicate id in survival table");

    AssembledDataset out;
    out.dataset.test_duration = test_duration;
    out.dataset.concentration_unit = std::move(concentration_unit);

    std::set<std::string> used;
    for (const auto& r : repro) {
        const auto it = by_id.find(r.replicate_id);
        if (it == by_id.end()) {
            throw std::invalid_argument("reproduction replicate '" + r.replicate_id + "' has no survival series");
        }
        const SurvivalSeries& s = *it->second;
        if (s.concentration != r.concentration) {
            throw std::invalid_argument("replicate '" + r.replicate_id + "' concentration mismatch: survival " +
                                        format_double(s.concentration) + " vs reproduction " +
                                        format_double(r.concentration));
        }
        used.insert(r.replicate_id);
        const double nid = compute_nid(s, test_duration);
        if (nid <= 0.0) {
            out.warnings.push_back("replicate '" + r.replicate_id + "' dropped: NID = 0 (no exposure time)");
            continue;
        }
        out.dataset.replicates.push_back(ReplicateDatum{
            r.replicate_id, r.concentration, r.n_offspring, nid, s.final_count() < s.initial_count()});
    }
    for (const auto& s : survival) {
        if (!used.count(s.replicate_id)) {
            throw std::invalid_argument("survival replicate '" + s.replicate_id + "' has no reproduction record");
        }
    }

    const auto concs = tested_concentrations(out.dataset);
    if (concs.size() < 2) {
        out.warnings.push_back("fewer than 2 distinct concentrations tested");
    } else if (concs.front() != 0.0) {
        out.warnings.push_back("no control (concentration 0) in dataset");
    }
    return out;
}

double reproduction_rate(const ReplicateDatum& datum) {
    if (datum.nid <= 0.0) throw std::invalid_argument("reproduction_rate requires NID > 0");
    return static_cast<double>(datum.n_offspring) / datum.nid;
}

std::vector<double> tested_concentrations(const BioassayDataset& data) {
    std::set<double> concs;
    for (const auto& r : data.replicates) concs.insert(r.concentration);
    return {concs.begin(), concs.end()};
}

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

std::string to_survival_csv(std::vector<SurvivalSeries> series) {
    std::sort(series.begin(), series.end(), [](const SurvivalSeries& a, const SurvivalSeries& b) {
        return std::tie(a.concentration, a.replicate_id) < std::tie(b.concentration, b.replicate_id);
    });
    std::string out = "replicate,concentration,time,n_alive\n";
    for (const auto& s : series) {
        for (const auto& [time, alive] : s.observations) {
            out += s.replicate_id;
            out += ',';
            out += format_double(s.concentration);
            out += ',';
            out += format_double(time);
            out += ',';
            out += std::to_string(alive);
            out += '\n';
        }
    }
    return out;
}

std::string to_reproduction_csv(std::vector<ReproductionRecord> records) {
    std::sort(records.begin(), records.end(), [](const ReproductionRecord& a, const ReproductionRecord& b) {
        return std::tie(a.concentration, a.replicate_id) < std::tie(b.concentration, b.replicate_id);
    });
    std::string out = "replicate,concentration,n_offspring\n";
    for (const auto& r : records) {
        out += r.replicate_id;
        out += ',';
        out += format_double(r.concentration);
        out += ',';
        out += std::to_string(r.n_offspring);
        out += '\n';
    }
    return out;
}

std::string to_nid_csv(const BioassayDataset& data) {
    auto rows = data.replicates;
    std::sort(rows.begin(), rows.end(), [](const ReplicateDatum& a, const ReplicateDatum& b) {
        return std::tie(a.concentration, a.replicate_id) < std::tie(b.concentration, b.replicate_id);
    });
    std::string out = "replicate,concentration,nid,had_mortality\n";
    for (const auto& r : rows) {
        out += r.replicate_id;
        out += ',';
        out += format_double(r.concentration);
        out += ',';
        out += format_double(r.nid);
        out += ',';
        out += r.had_mortality ? "true" : "false";
        out += '\n';
    }
    return out;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xF];
        h >>= 4;
    }
    return std::string(buf, 16);
}

}  // namespace reprofit
