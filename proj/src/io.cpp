#include "dex/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dex {

namespace {

std::string trimmed(std::string s) {
    // tolerate CRLF input and stray surrounding blanks
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool parse_real(std::string_view text, double& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

struct CsvRow {
    std::string value;
    std::string count;
};

bool split_csv(const std::string& line, CsvRow& row) {
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) return false;
    if (line.find(',', comma + 1) != std::string::npos) return false;
    row.value = trimmed(line.substr(0, comma));
    row.count = trimmed(line.substr(comma + 1));
    return true;
}

}  // namespace

DataFormat format_from_name(std::string_view name) {
    if (name == "raw") return DataFormat::Raw;
    if (name == "freq") return DataFormat::Freq;
    if (name == "freq_censored") return DataFormat::FreqCensored;
    throw std::invalid_argument("unknown data format: " + std::string(name));
}

const char* format_name(DataFormat format) {
    switch (format) {
        case DataFormat::Raw: return "raw";
        case DataFormat::Freq: return "freq";
        case DataFormat::FreqCensored: return "freq_censored";
    }
    return "?";
}

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

Dataset load_dataset(std::istream& in, DataFormat format, const std::string& source) {
    Dataset ds;
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;
    bool saw_censor = false;

    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trimmed(line);
        if (text.empty()) continue;

        if (format == DataFormat::Raw) {
            long long v = 0;
            if (!parse_int(text, v) || v < 0)
                throw ParseError(source, lineno, "expected a non-negative integer, got '" + text + "'");
            ds.counts.add(v);
            ds.ordered.push_back(v);
            continue;
        }

        if (!saw_header) {
            if (text != "value,count")
                throw ParseError(source, lineno, "expected header 'value,count', got '" + text + "'");
            saw_header = true;
            continue;
        }
        if (saw_censor)
            throw ParseError(source, lineno, "rows after the censored '>=' row are not allowed");

        CsvRow row;
        if (!split_csv(text, row))
            throw ParseError(source, lineno, "expected 'value,count', got '" + text + "'");
        std::uint64_t count = 0;
        if (!parse_int(row.count, count) || count == 0)
            throw ParseError(source, lineno, "expected a positive count, got '" + row.count + "'");

        if (format == DataFormat::FreqCensored && row.value.rfind(">=", 0) == 0) {
            long long threshold = 0;
            if (!parse_int(std::string_view(row.value).substr(2), threshold) || threshold < 0)
                throw ParseError(source, lineno,
                                 "expected '>=<integer>' in the value column, got '" + row.value + "'");
            ds.counts.set_censor(threshold, count);
            saw_censor = true;
            continue;
        }

        long long v = 0;
        if (!parse_int(row.value, v) || v < 0)
            throw ParseError(source, lineno, "expected a non-negative integer value, got '" + row.value + "'");
        if (ds.counts.cells().count(v))
            throw ParseError(source, lineno, "duplicate value " + row.value);
        ds.counts.add(v, count);
    }

    if (format != DataFormat::Raw && !saw_header)
        throw ParseError(source, lineno, "missing 'value,count' header");
    if (format == DataFormat::FreqCensored && !saw_censor)
        throw ParseError(source, lineno, "freq_censored input needs a final '>=c,count' row");
    if (ds.counts.empty())
        throw ParseError(source, lineno, "no observations");
    ds.counts.validate();
    return ds;
}

Dataset load_dataset_file(const std::string& path, DataFormat format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_dataset(in, format, path);
}

std::vector<double> load_covariate(std::istream& in, const std::string& source) {
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trimmed(line);
        if (text.empty()) continue;
        double v = 0.0;
        if (!parse_real(text, v) || !std::isfinite(v))
            throw ParseError(source, lineno, "expected a finite real, got '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ParseError(source, lineno, "no covariate values");
    return out;
}

std::vector<double> load_covariate_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_covariate(in, path);
}

void write_freq(std::ostream& out, const GroupedCounts& counts) {
    out << "value,count\n";
    for (const auto& [v, c] : counts.cells()) out << v << ',' << c << '\n';
    if (counts.censor())
        out << ">=" << counts.censor()->threshold << ',' << counts.censor()->count << '\n';
}

}  // namespace dex
