#include "circred/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace circred {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

[[noreturn]] void fail_at(const std::string& path, int line_no,
                          const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                             what);
}

Quarter parse_date(const std::string& s, const std::string& path,
                   int line_no) {
    // 2008Q3
    auto qpos = s.find_first_of("Qq");
    if (qpos != std::string::npos && s.find('-') == std::string::npos) {
        try {
            int year = std::stoi(s.substr(0, qpos));
            int q = std::stoi(s.substr(qpos + 1));
            if (q < 1 || q > 4) fail_at(path, line_no, "quarter out of range: " + s);
            return {year, q};
        } catch (const std::invalid_argument&) {
            fail_at(path, line_no, "malformed quarter date: " + s);
        }
    }
    // YYYY-MM-DD quarter end
    if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
        try {
            int year = std::stoi(s.substr(0, 4));
            int month = std::stoi(s.substr(5, 2));
            if (month < 1 || month > 12)
                fail_at(path, line_no, "month out of range: " + s);
            return {year, (month + 2) / 3};
        } catch (const std::invalid_argument&) {
            fail_at(path, line_no, "malformed ISO date: " + s);
        }
    }
    fail_at(path, line_no, "unrecognized date format: " + s);
}

bool header_says_percent(const std::string& header) {
    std::string lower = header;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return lower.find("percent") != std::string::npos;
}

} // namespace

std::vector<ChargeOffSeries> ingest_csv(const std::string& path,
                                        const IngestOptions& options) {
    if (!(options.epsilon_floor > 0 && options.epsilon_floor < 1))
        throw std::invalid_argument("ingest_csv: epsilon_floor in (0,1) required");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("ingest_csv: " + path + " is empty");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2)
        fail_at(path, 1, "need a date column and at least one category");

    const std::size_t n_cat = header.size() - 1;
    std::vector<ChargeOffSeries> series(n_cat);
    for (std::size_t j = 0; j < n_cat; ++j) {
        series[j].category = header[j + 1];
        if (series[j].category.empty())
            fail_at(path, 1, "empty category name in header");
    }

    std::vector<Quarter> quarters;
    std::vector<std::vector<double>> raw(n_cat);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            fail_at(path, line_no,
                    "expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(fields.size()));
        const Quarter q = parse_date(fields[0], path, line_no);
        if (!quarters.empty() && !(quarters.back() < q))
            fail_at(path, line_no, "dates not strictly chronological");
        quarters.push_back(q);
        for (std::size_t j = 0; j < n_cat; ++j) {
            std::size_t consumed = 0;
            double v = 0.0;
            try {
                v = std::stod(fields[j + 1], &consumed);
            } catch (const std::exception&) {
                fail_at(path, line_no, "malformed rate: " + fields[j + 1]);
            }
            if (consumed != fields[j + 1].size())
                fail_at(path, line_no, "malformed rate: " + fields[j + 1]);
            if (v < 0) fail_at(path, line_no, "negative rate");
            raw[j].push_back(v);
        }
    }
    if (quarters.empty())
        throw std::runtime_error("ingest_csv: " + path + " has no data rows");

    for (std::size_t j = 0; j < n_cat; ++j) {
        ChargeOffSeries& s = series[j];
        s.quarters = quarters;
        bool percent = false;
        switch (options.units) {
        case RateUnits::Percent: percent = true; break;
        case RateUnits::Fraction: percent = false; break;
        case RateUnits::Auto:
            percent = header_says_percent(s.category) ||
                      *std::max_element(raw[j].begin(), raw[j].end()) > 1.0;
            break;
        }
        s.percent_detected = percent;
        s.rates.reserve(raw[j].size());
        for (double v : raw[j]) {
            double r = percent ? v / 100.0 : v;
            if (r >= 1.0)
                throw std::runtime_error("ingest_csv: rate >= 1 in category " +
                                         s.category);
            if (r < options.epsilon_floor) {
                r = options.epsilon_floor;
                ++s.floored_count;
            }
            s.rates.push_back(r);
        }
    }
    return series;
}

} // namespace circred
