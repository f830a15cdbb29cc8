#ifndef CIRCRED_DATA_HPP
#define CIRCRED_DATA_HPP

#include <string>
#include <vector>

namespace circred {

struct Quarter {
    int year = 0;
    int q = 0; // 1..4

    auto operator<=>(const Quarter&) const = default;
};

// One category column of a quarterly charge-off CSV, rates as fractions.
struct ChargeOffSeries {
    std::string category;
    std::vector<Quarter> quarters; // chronological, no duplicates
    std::vector<double> rates;     // in [0, 1), zeros floored
    int floored_count = 0;
    bool percent_detected = false;
};

enum class RateUnits { Auto, Percent, Fraction };

struct IngestOptions {
    RateUnits units = RateUnits::Auto;
    double epsilon_floor = 1e-6;
};

// Parses `date,<category1>,<category2>,...`. Dates are `2008Q3` or
// `YYYY-MM-DD` quarter ends. In Auto mode a column is treated as percent
// when its header mentions "percent" or its maximum exceeds 1.
std::vector<ChargeOffSeries> ingest_csv(const std::string& path,
                                        const IngestOptions& options = {});

} // namespace circred

#endif
