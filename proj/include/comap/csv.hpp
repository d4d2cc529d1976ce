#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace comap {

// Round-trip-safe text form for doubles; identical inputs always produce
// identical bytes, which the reproducibility contract relies on.
inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n - 1)
    size_t count = 0;
};

inline MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    out.count = values.size();
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - out.mean) * (v - out.mean);
        out.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return out;
}

}  // namespace comap
