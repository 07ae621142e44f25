// io.hpp
//
// Dataset ingestion for the CLI and tests: raw integer lists, value/count
// frequency CSVs, and frequency CSVs with a trailing right-censored row.
// Parse failures throw ParseError carrying a "source:line: message" text.

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dex/types.hpp"

namespace dex {

enum class DataFormat {
    Raw,           // one non-negative integer per line, no header
    Freq,          // CSV with header "value,count"
    FreqCensored,  // as Freq, final data row ">=c,count"
};

// Returns the format for "raw" | "freq" | "freq_censored", or throws
// std::invalid_argument.
DataFormat format_from_name(std::string_view name);
const char* format_name(DataFormat format);

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct Dataset {
    GroupedCounts counts;
    // Present only for raw input: the observations in file order, so that
    // a covariate column can stay aligned with them.
    std::vector<long long> ordered;
};

// `source` names the stream in error messages (a path or "-").
Dataset load_dataset(std::istream& in, DataFormat format, const std::string& source);
Dataset load_dataset_file(const std::string& path, DataFormat format);

// One real per line, aligned with raw observations.
std::vector<double> load_covariate(std::istream& in, const std::string& source);
std::vector<double> load_covariate_file(const std::string& path);

// Emits the grouped sample in freq (or freq_censored, when a censor cell
// is present) format.
void write_freq(std::ostream& out, const GroupedCounts& counts);

}  // namespace dex
