#include "rwre/csv.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "rwre/errors.hpp"

namespace rwre {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t, std::span<const double> ell) {
    const std::vector<double> proj = projection(t, ell);
    os << "step";
    for (int i = 1; i <= t.dimension; ++i) os << ",x" << i;
    os << ",proj\n";
    const std::int64_t n = t.num_steps();
    for (std::int64_t k = 0; k <= n; ++k) {
        os << k;
        const std::span<const std::int64_t> pos = t.position(k);
        for (int i = 0; i < t.dimension; ++i) os << ',' << pos[static_cast<std::size_t>(i)];
        os << ',' << format_double(proj[static_cast<std::size_t>(k)]) << '\n';
    }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::int64_t parse_int(const std::string& field, std::size_t line) {
    std::int64_t value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError("expected integer, got \"" + field + "\"", line);
    }
    return value;
}

}  // namespace

Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) {
        throw ParseError("empty trajectory file", 1);
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_fields(line);
    if (header.size() < 3 || header.front() != "step" || header.back() != "proj") {
        throw ParseError("expected header step,x1,...,xd,proj", line_no);
    }
    const int d = static_cast<int>(header.size()) - 2;
    for (int i = 0; i < d; ++i) {
        if (header[static_cast<std::size_t>(i + 1)] != "x" + std::to_string(i + 1)) {
            throw ParseError("expected coordinate column x" + std::to_string(i + 1), line_no);
        }
    }

    std::vector<std::int64_t> start;
    std::vector<std::uint16_t> steps;
    std::vector<std::int64_t> prev(static_cast<std::size_t>(d));
    std::int64_t expected_step = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (static_cast<int>(fields.size()) != d + 2) {
            throw ParseError("expected " + std::to_string(d + 2) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        if (parse_int(fields[0], line_no) != expected_step) {
            throw ParseError("step column must run 0,1,2,...; got " + fields[0], line_no);
        }
        std::vector<std::int64_t> pos(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
            pos[static_cast<std::size_t>(i)] = parse_int(fields[static_cast<std::size_t>(i + 1)], line_no);
        }
        if (expected_step == 0) {
            start = pos;
        } else {
            // exactly one coordinate may change, by exactly +-1
            int changed = -1;
            for (int i = 0; i < d; ++i) {
                const std::int64_t diff = pos[static_cast<std::size_t>(i)] - prev[static_cast<std::size_t>(i)];
                if (diff == 0) continue;
                if (std::abs(diff) != 1 || changed >= 0) {
                    throw ParseError("row is not a unit lattice step", line_no);
                }
                changed = i;
            }
            if (changed < 0) {
                throw ParseError("row is not a unit lattice step", line_no);
            }
            const std::int64_t diff = pos[static_cast<std::size_t>(changed)] - prev[static_cast<std::size_t>(changed)];
            steps.push_back(static_cast<std::uint16_t>(2 * changed + (diff > 0 ? 0 : 1)));
        }
        prev = pos;
        ++expected_step;
    }
    if (expected_step == 0) {
        throw ParseError("trajectory file has a header but no rows", line_no);
    }
    return Trajectory::from_steps(std::move(start), std::move(steps));
}

void write_regen_report_csv(std::ostream& os, const RegenerationSequence& r,
                            std::span<const RegenSample> samples) {
    const int d = samples.empty() ? 0 : static_cast<int>(samples[0].delta_x.size());
    os << "k,tau_k,delta_tau";
    for (int i = 1; i <= d; ++i) os << ",dx" << i;
    os << ",block_sup\n";
    for (std::size_t k = 0; k < samples.size(); ++k) {
        os << (k + 1) << ',' << r.times[k] << ',' << samples[k].delta_tau;
        for (std::int64_t dx : samples[k].delta_x) os << ',' << dx;
        os << ',' << format_double(samples[k].block_sup) << '\n';
    }
}

void write_lil_curves_csv(std::ostream& os, std::span<const LilCurve> curves) {
    os << "replica,n,statistic,term_main,term2,term3\n";
    for (const auto& curve : curves) {
        for (const auto& p : curve.points) {
            os << curve.replica << ',' << p.n << ',' << format_double(p.statistic) << ','
               << format_double(p.term_main) << ',' << format_double(p.term2) << ','
               << format_double(p.term3) << '\n';
        }
    }
}

void write_lil_envelope_csv(std::ostream& os, const DecayTable& table) {
    os << "n,stat_max,stat_min,q99_abs_t2,q99_abs_t3\n";
    for (const auto& row : table.rows) {
        os << row.n << ',' << format_double(row.stat_max) << ',' << format_double(row.stat_min)
           << ',' << format_double(row.q99_abs_t2) << ',' << format_double(row.q99_abs_t3) << '\n';
    }
}

}  // namespace rwre
