#include "twee/tracy_widom.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

// Boost 1.74 pchip calls isnan unqualified; expose the global one.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>

#include "twee/error.hpp"

namespace twee {

namespace detail {
extern const std::string_view kTw1TableText;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end;
}

// log of the right-tail shape exp(-2/3 s^{3/2}) / (4 sqrt(pi) s^{3/4}), s > 0.
double log_right_tail(double s) {
    return -2.0 / 3.0 * s * std::sqrt(s) - 0.75 * std::log(s) - std::log(4.0 * std::sqrt(std::numbers::pi));
}

}  // namespace

TWTable TWTable::parse(std::string_view text) {
    TWTable table;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (!table.provenance.empty()) table.provenance += "; ";
            table.provenance += std::string(trim(line.substr(1)));
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos) {
            throw ParseError("TW table line " + std::to_string(line_no) + ": expected `s,cdf`");
        }
        double s = 0.0;
        double f = 0.0;
        const bool ok = parse_double(line.substr(0, comma), s) && parse_double(line.substr(comma + 1), f);
        if (!ok) {
            if (table.grid.empty() && trim(line.substr(0, comma)) == "s") continue;  // header
            throw ParseError("TW table line " + std::to_string(line_no) + ": malformed number");
        }
        table.grid.push_back(s);
        table.cdf.push_back(f);
    }
    if (table.grid.size() < 4) throw ValidationError("TW table needs at least 4 rows");
    for (std::size_t i = 0; i < table.grid.size(); ++i) {
        if (!(table.cdf[i] > 0.0 && table.cdf[i] < 1.0)) throw ValidationError("TW table values must lie in (0, 1)");
        if (i > 0 && !(table.grid[i] > table.grid[i - 1] && table.cdf[i] > table.cdf[i - 1])) {
            throw ValidationError("TW table must be strictly increasing (row " + std::to_string(i + 1) + ")");
        }
    }
    if (!(table.grid.front() < 0.0 && table.grid.back() > 0.0)) {
        throw ValidationError("TW table grid must straddle zero");
    }
    return table;
}

TWTable TWTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open TW table " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const TWTable& TWTable::embedded() {
    static const TWTable table = parse(detail::kTw1TableText);
    return table;
}

struct TracyWidom1::Impl {
    TWTable table;
    boost::math::interpolators::pchip<std::vector<double>> spline;
    double lo, hi;          // grid ends
    double cdf_lo, sf_hi;   // anchoring values for the tails
    double log_tail_hi;     // log_right_tail(hi)

    static boost::math::interpolators::pchip<std::vector<double>> make_spline(const TWTable& t) {
        const double lo = t.grid.front();
        const double hi = t.grid.back();
        const double left_slope = t.cdf.front() * lo * lo / 8.0;
        const double right_slope = (1.0 - t.cdf.back()) * (std::sqrt(hi) + 0.75 / hi);
        return {std::vector<double>(t.grid), std::vector<double>(t.cdf), left_slope, right_slope};
    }

    explicit Impl(TWTable t)
        : table(std::move(t)),
          spline(make_spline(table)),
          lo(table.grid.front()),
          hi(table.grid.back()),
          cdf_lo(table.cdf.front()),
          sf_hi(1.0 - table.cdf.back()),
          log_tail_hi(log_right_tail(hi)) {}

    // Left tail: F(s) = F(lo) exp(-(|s|^3 - |lo|^3) / 24).
    double left_cdf(double s) const { return cdf_lo * std::exp((s * s * s - lo * lo * lo) / 24.0); }
    // Right tail: 1 - F(s) = (1 - F(hi)) g(s) / g(hi).
    double right_sf(double s) const { return sf_hi * std::exp(log_right_tail(s) - log_tail_hi); }
};

TracyWidom1::TracyWidom1(TWTable table) : impl_(std::make_unique<Impl>(std::move(table))) {}
TracyWidom1::~TracyWidom1() = default;
TracyWidom1::TracyWidom1(TracyWidom1&&) noexcept = default;
TracyWidom1& TracyWidom1::operator=(TracyWidom1&&) noexcept = default;

const TracyWidom1& TracyWidom1::standard() {
    static const TracyWidom1 dist(TWTable::embedded());
    return dist;
}

double TracyWidom1::lower() const noexcept { return impl_->lo; }
double TracyWidom1::upper() const noexcept { return impl_->hi; }
const TWTable& TracyWidom1::table() const noexcept { return impl_->table; }

double TracyWidom1::cdf(double s) const {
    if (std::isnan(s)) throw ValidationError("tw cdf: argument is NaN");
    if (s < impl_->lo) return impl_->left_cdf(s);
    if (s > impl_->hi) return 1.0 - impl_->right_sf(s);
    return std::clamp(impl_->spline(s), 0.0, 1.0);
}

double TracyWidom1::sf(double s) const {
    if (std::isnan(s)) throw ValidationError("tw sf: argument is NaN");
    if (s > impl_->hi) return impl_->right_sf(s);
    if (s < impl_->lo) return 1.0 - impl_->left_cdf(s);
    return std::clamp(1.0 - impl_->spline(s), 0.0, 1.0);
}

double TracyWidom1::pdf(double s) const {
    if (std::isnan(s)) throw ValidationError("tw pdf: argument is NaN");
    if (std::isinf(s)) return 0.0;
    if (s < impl_->lo) return impl_->left_cdf(s) * s * s / 8.0;
    if (s > impl_->hi) return impl_->right_sf(s) * (std::sqrt(s) + 0.75 / s);
    return std::max(impl_->spline.prime(s), 0.0);
}

double TracyWidom1::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("tw quantile: probability must lie in (0, 1)");
    const Impl& m = *impl_;
    if (p < m.cdf_lo) {
        const double cube = -m.lo * m.lo * m.lo - 24.0 * std::log(p / m.cdf_lo);
        return -std::cbrt(cube);
    }
    const double q = 1.0 - p;
    using boost::math::tools::eps_tolerance;
    using boost::math::tools::toms748_solve;
    std::uintmax_t iters = 200;
    if (q < m.sf_hi) {
        // Solve log_right_tail(s) = log(q / sf_hi) + log_tail_hi on s > hi.
        const double target = std::log(q / m.sf_hi) + m.log_tail_hi;
        auto f = [&](double s) { return log_right_tail(s) - target; };
        double b = 2.0 * m.hi;
        while (f(b) > 0.0) b *= 2.0;
        const auto r = toms748_solve(f, m.hi, b, f(m.hi), f(b), eps_tolerance<double>(52), iters);
        return 0.5 * (r.first + r.second);
    }
    // Inside the table: match whichever tail probability is smaller for accuracy.
    auto f = [&](double s) { return p <= 0.5 ? cdf(s) - p : q - sf(s); };
    const double flo = f(m.lo);
    const double fhi = f(m.hi);
    if (flo >= 0.0) return m.lo;
    if (fhi <= 0.0) return m.hi;
    const auto r = toms748_solve(f, m.lo, m.hi, flo, fhi, eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

double tw_cdf(double s) { return TracyWidom1::standard().cdf(s); }
double tw_sf(double s) { return TracyWidom1::standard().sf(s); }
double tw_pdf(double s) { return TracyWidom1::standard().pdf(s); }
double tw_quantile(double p) { return TracyWidom1::standard().quantile(p); }

TWMoments tw_moments() noexcept { return {-1.2065335745820, 1.6077810345810}; }

std::string_view to_string(FitMethod m) noexcept {
    switch (m) {
        case FitMethod::mm: return "mm";
        case FitMethod::mle: return "mle";
        case FitMethod::ad: return "ad";
        case FitMethod::adr: return "adr";
    }
    return "unknown";
}

FitMethod parse_fit_method(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "mm") return FitMethod::mm;
    if (lower == "mle") return FitMethod::mle;
    if (lower == "ad") return FitMethod::ad;
    if (lower == "adr") return FitMethod::adr;
    throw ParseError("unknown fit method `" + std::string(text) + "` (expected mm, mle, ad or adr)");
}

}  // namespace twee
