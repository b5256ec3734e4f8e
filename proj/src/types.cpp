#include "faaslab/types.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace faaslab {

SimTime us_from_ms(double ms) {
    return static_cast<SimTime>(std::llround(ms * 1000.0));
}

std::string format_ms(SimTime us) {
    const bool negative = us < 0;
    const SimTime abs_us = negative ? -us : us;
    const SimTime whole = abs_us / kUsPerMs;
    const SimTime frac = abs_us % kUsPerMs;

    std::string out = negative ? "-" : "";
    out += std::to_string(whole);
    if (frac != 0) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), ".%03lld", static_cast<long long>(frac));
        std::string tail(buf);
        while (tail.back() == '0') {
            tail.pop_back();
        }
        out += tail;
    }
    return out;
}

SimTime parse_ms(const std::string& text) {
    if (text.empty()) {
        throw std::invalid_argument("empty millisecond value");
    }
    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '-') {
        negative = true;
        ++pos;
    }
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) {
        throw std::invalid_argument("malformed millisecond value: " + text);
    }

    SimTime whole = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        whole = whole * 10 + (text[pos] - '0');
        ++pos;
    }

    SimTime frac = 0;
    if (pos < text.size()) {
        if (text[pos] != '.') {
            throw std::invalid_argument("malformed millisecond value: " + text);
        }
        ++pos;
        int digits = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            if (++digits > 3) {
                throw std::invalid_argument("sub-microsecond precision in: " + text);
            }
            frac = frac * 10 + (text[pos] - '0');
            ++pos;
        }
        if (digits == 0 || pos != text.size()) {
            throw std::invalid_argument("malformed millisecond value: " + text);
        }
        for (; digits < 3; ++digits) {
            frac *= 10;
        }
    }

    const SimTime us = whole * kUsPerMs + frac;
    return negative ? -us : us;
}

} // namespace faaslab
