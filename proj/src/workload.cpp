#include "faaslab/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace faaslab {

std::vector<std::string> validate_workload(const WorkloadSpec& spec, std::size_t catalog_size) {
    std::vector<std::string> violations;

    if (spec.duration_us <= 0) {
        violations.push_back("workload duration_ms must be > 0");
    }

    switch (spec.popularity.kind) {
    case Popularity::Kind::UniformAll:
        break;
    case Popularity::Kind::Zipf:
        if (spec.popularity.zipf_s <= 0.0) {
            violations.push_back("zipf exponent must be > 0");
        }
        break;
    case Popularity::Kind::Explicit: {
        if (spec.popularity.weights.size() != catalog_size) {
            violations.push_back("explicit weights must cover every catalog function");
        }
        double sum = 0.0;
        for (double w : spec.popularity.weights) {
            if (w < 0.0) {
                violations.push_back("explicit weights must be nonnegative");
                break;
            }
            sum += w;
        }
        if (!(sum > 0.0)) {
            violations.push_back("explicit weights must sum to > 0");
        }
        break;
    }
    }

    switch (spec.mode) {
    case WorkloadSpec::Mode::ClosedLoop: {
        if (spec.stages.empty()) {
            violations.push_back("closed-loop workload needs at least one vu stage");
        }
        SimTime prev = -1;
        for (const VuStage& s : spec.stages) {
            if (s.start_us < 0 || s.start_us <= prev) {
                violations.push_back("vu stages must be ordered by strictly increasing start_ms");
                break;
            }
            prev = s.start_us;
        }
        if (spec.think.lo_us < 0 || spec.think.hi_us < spec.think.lo_us) {
            violations.push_back("think_ms must satisfy 0 <= lo <= hi");
        }
        break;
    }
    case WorkloadSpec::Mode::OpenLoop:
        if (spec.segments.empty()) {
            violations.push_back("open-loop workload needs at least one rate segment");
        }
        for (const RateSegment& s : spec.segments) {
            if (s.duration_us <= 0) {
                violations.push_back("rate segment duration must be > 0");
            }
            if (s.req_per_s < 0.0) {
                violations.push_back("rate segment rate must be >= 0");
            }
        }
        break;
    case WorkloadSpec::Mode::Trace:
        if (spec.trace.empty() && spec.trace_path.empty()) {
            violations.push_back("trace workload needs a trace_path");
        }
        break;
    }

    return violations;
}

FunctionSampler::FunctionSampler(const Popularity& popularity, std::size_t catalog_size) {
    if (catalog_size == 0) {
        throw std::invalid_argument("FunctionSampler: empty catalog");
    }

    std::vector<double> weights(catalog_size, 1.0);
    switch (popularity.kind) {
    case Popularity::Kind::UniformAll:
        break;
    case Popularity::Kind::Zipf:
        for (std::size_t k = 0; k < catalog_size; ++k) {
            weights[k] = std::pow(static_cast<double>(k + 1), -popularity.zipf_s);
        }
        break;
    case Popularity::Kind::Explicit:
        if (popularity.weights.size() != catalog_size) {
            throw std::invalid_argument("FunctionSampler: weights do not match catalog size");
        }
        weights = popularity.weights;
        break;
    }

    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) {
            throw std::invalid_argument("FunctionSampler: negative weight");
        }
        sum += w;
    }
    if (!(sum > 0.0)) {
        throw std::invalid_argument("FunctionSampler: weights sum to zero");
    }

    pmf_.resize(catalog_size);
    cdf_.resize(catalog_size);
    double acc = 0.0;
    for (std::size_t k = 0; k < catalog_size; ++k) {
        pmf_[k] = weights[k] / sum;
        acc += pmf_[k];
        cdf_[k] = acc;
    }
    cdf_.back() = 1.0;
}

FunctionIndex FunctionSampler::sample(Rng& rng) const {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    return static_cast<FunctionIndex>(k);
}

std::vector<Arrival> open_loop_arrivals(const WorkloadSpec& spec, const FunctionSampler& sampler, Rng& rng) {
    std::vector<Arrival> arrivals;
    SimTime segment_start = 0;
    for (const RateSegment& seg : spec.segments) {
        const SimTime segment_end = std::min(segment_start + seg.duration_us, spec.duration_us);
        if (seg.req_per_s > 0.0) {
            const double mean_gap_us = static_cast<double>(kUsPerSec) / seg.req_per_s;
            SimTime t = segment_start;
            while (true) {
                t += std::max<SimTime>(0, static_cast<SimTime>(std::llround(rng.exponential(mean_gap_us))));
                if (t >= segment_end) {
                    break;
                }
                arrivals.push_back(Arrival{t, sampler.sample(rng)});
            }
        }
        segment_start += seg.duration_us;
        if (segment_start >= spec.duration_us) {
            break;
        }
    }
    return arrivals;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.push_back("");
    }
    return fields;
}

} // namespace

std::vector<Arrival> load_trace(const std::string& path, std::span<const FunctionProfile> catalog) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open trace file: " + path);
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("trace file is empty: " + path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }

    const std::vector<std::string> header = split_csv_line(line);
    std::ptrdiff_t arrival_col = -1;
    std::ptrdiff_t function_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "arrival_ms") {
            arrival_col = static_cast<std::ptrdiff_t>(i);
        } else if (header[i] == "function") {
            function_col = static_cast<std::ptrdiff_t>(i);
        }
    }
    if (arrival_col < 0 || function_col < 0) {
        throw std::runtime_error("trace header must name columns arrival_ms and function: " + path);
    }

    std::vector<Arrival> arrivals;
    SimTime prev = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<std::ptrdiff_t>(fields.size()) <= std::max(arrival_col, function_col)) {
            throw std::runtime_error("trace line " + std::to_string(line_no) + ": too few columns");
        }

        SimTime t;
        try {
            t = parse_ms(fields[static_cast<std::size_t>(arrival_col)]);
        } catch (const std::exception& e) {
            throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
        }
        if (t < 0) {
            throw std::runtime_error("trace line " + std::to_string(line_no) + ": negative arrival time");
        }
        if (t < prev) {
            throw std::runtime_error("trace line " + std::to_string(line_no) +
                                     ": arrivals must be non-decreasing");
        }
        prev = t;

        const std::string& fn = fields[static_cast<std::size_t>(function_col)];
        FunctionIndex function = 0;
        bool known = false;
        for (std::size_t i = 0; i < catalog.size(); ++i) {
            if (catalog[i].function_id == fn) {
                function = static_cast<FunctionIndex>(i);
                known = true;
                break;
            }
        }
        if (!known) {
            throw std::runtime_error("trace line " + std::to_string(line_no) + ": unknown function " + fn);
        }

        arrivals.push_back(Arrival{t, function});
    }
    return arrivals;
}

VirtualUsers::VirtualUsers(const WorkloadSpec& spec, std::uint64_t master_seed)
    : stages_(spec.stages), think_(spec.think) {
    for (const VuStage& s : stages_) {
        max_vus_ = std::max(max_vus_, s.vu_count);
    }
    vus_.reserve(max_vus_);
    for (std::uint32_t v = 0; v < max_vus_; ++v) {
        vus_.push_back(VuState{derive_stream(master_seed, "workload/vu", v), 0xcbf29ce484222325ULL});
    }
}

std::uint32_t VirtualUsers::count_at(SimTime t) const {
    std::uint32_t count = 0;
    for (const VuStage& s : stages_) {
        if (s.start_us <= t) {
            count = s.vu_count;
        } else {
            break;
        }
    }
    return count;
}

SimTime VirtualUsers::draw_think_us(std::uint32_t vu) {
    VuState& st = vus_[vu];
    const SimTime think = think_.lo_us == think_.hi_us
                              ? think_.lo_us
                              : st.rng.uniform_i64(think_.lo_us, think_.hi_us);
    st.digest = mix64(st.digest ^ 0x7400000000000000ULL ^ static_cast<std::uint64_t>(think));
    return think;
}

FunctionIndex VirtualUsers::draw_function(std::uint32_t vu, const FunctionSampler& sampler) {
    VuState& st = vus_[vu];
    const FunctionIndex f = sampler.sample(st.rng);
    st.digest = mix64(st.digest ^ 0x6600000000000000ULL ^ f);
    return f;
}

std::uint64_t VirtualUsers::draw_checksum() const {
    std::uint64_t combined = 0;
    for (std::size_t v = 0; v < vus_.size(); ++v) {
        combined ^= mix64(vus_[v].digest ^ (static_cast<std::uint64_t>(v) + 1));
    }
    return combined;
}

} // namespace faaslab
