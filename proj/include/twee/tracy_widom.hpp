#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace twee {

/// Tabulated TW(1) CDF on an ascending uniform-ish grid.
struct TWTable {
    std::vector<double> grid;
    std::vector<double> cdf;
    std::string provenance;

    /// Parses `s,cdf` lines; `#` lines carry provenance, a `s,cdf` header is skipped.
    /// Throws ParseError on malformed lines and ValidationError when the values are
    /// not strictly increasing inside (0, 1).
    static TWTable parse(std::string_view text);
    static TWTable load(const std::filesystem::path& path);
    /// The table shipped with the library (data/tw1_cdf.csv).
    static const TWTable& embedded();
};

/// Tracy-Widom distribution of order 1: monotone cubic interpolation of the
/// table inside its range, tail asymptotics outside it.
class TracyWidom1 {
public:
    explicit TracyWidom1(TWTable table);
    ~TracyWidom1();
    TracyWidom1(TracyWidom1&&) noexcept;
    TracyWidom1& operator=(TracyWidom1&&) noexcept;

    double cdf(double s) const;
    /// 1 - cdf(s), accurate in the upper tail.
    double sf(double s) const;
    double pdf(double s) const;
    double quantile(double p) const;

    double lower() const noexcept;
    double upper() const noexcept;
    const TWTable& table() const noexcept;

    /// Shared instance built from the embedded table.
    static const TracyWidom1& standard();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct TWMoments {
    double mean;
    double variance;
};

double tw_cdf(double s);
double tw_sf(double s);
double tw_pdf(double s);
double tw_quantile(double p);
/// Published high-precision moments of TW(1).
TWMoments tw_moments() noexcept;

enum class FitMethod { mm, mle, ad, adr };

std::string_view to_string(FitMethod m) noexcept;
/// Accepts "mm", "mle", "ad", "adr" (case-insensitive); throws ParseError otherwise.
FitMethod parse_fit_method(std::string_view text);

/// sigma * TW(1) + mu.
struct TWLocationScale {
    double mu = 0.0;
    double sigma = 1.0;
    FitMethod fit_method = FitMethod::mm;
    std::size_t sample_size = 0;
    double objective_value = 0.0;

    double standardize(double x) const noexcept { return (x - mu) / sigma; }
    double cdf(double x) const { return tw_cdf(standardize(x)); }
    double sf(double x) const { return tw_sf(standardize(x)); }
    double pdf(double x) const { return tw_pdf(standardize(x)) / sigma; }
    double quantile(double p) const { return mu + sigma * tw_quantile(p); }
};

}  // namespace twee
