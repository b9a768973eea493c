#ifndef STATEPREP_CLI_CONFIG_HPP
#define STATEPREP_CLI_CONFIG_HPP

// JSON experiment configs. Every problem found is recorded against the
// dotted path of the offending key, so a single validation pass reports all
// of them. Schema: docs/config-schema.md.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../stateprep.hpp"

namespace stateprep::cli
{

using json = nlohmann::json;

struct Diagnostic
{
    std::string path;
    std::string message;
};

// Raised once validation has finished with at least one diagnostic.
class ConfigError : public ValidationError
{
public:
    explicit ConfigError(std::vector<Diagnostic> diags)
        : ValidationError(render(diags)), diagnostics(std::move(diags))
    {
    }

    std::vector<Diagnostic> diagnostics;

    static std::string render(const std::vector<Diagnostic> &diags)
    {
        std::ostringstream out;
        for (std::size_t i = 0; i < diags.size(); ++i) {
            out << (i ? "\n" : "") << diags[i].path << ": " << diags[i].message;
        }
        return out.str();
    }
};

inline std::string join_path(const std::string &base, const std::string &key)
{
    return base.empty() ? key : base + "." + key;
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string &text, std::size_t byte)
{
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// Parses text; a syntax error becomes a ConfigError at "<line>:<column>".
inline json parse_config_text(const std::string &text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        const auto [line, col] = line_column(text, e.byte);
        std::ostringstream where;
        where << "line " << line << ", column " << col;
        throw ConfigError({{where.str(), std::string("JSON parse error: ") + e.what()}});
    }
}

inline std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError({{path, "cannot read config file"}});
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

class ConfigReader
{
public:
    explicit ConfigReader(const json &root) : root_(root) {}

    const json &root() const { return root_; }
    const std::vector<Diagnostic> &diagnostics() const { return diags_; }
    bool ok() const { return diags_.empty(); }

    void error(const std::string &path, const std::string &message) { diags_.push_back({path, message}); }

    void throw_if_failed() const
    {
        if (!diags_.empty()) {
            throw ConfigError(diags_);
        }
    }

    const json *child(const json &node, const std::string &path, const std::string &key, bool required = true)
    {
        if (!node.is_object()) {
            error(path, "expected an object");
            return nullptr;
        }
        const auto it = node.find(key);
        if (it == node.end()) {
            if (required) {
                error(join_path(path, key), "missing required key");
            }
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json &node, const std::string &path, const std::string &key,
                                 std::optional<double> fallback = std::nullopt)
    {
        const json *v = child(node, path, key, !fallback.has_value());
        if (v == nullptr) {
            return fallback;
        }
        if (!v->is_number()) {
            error(join_path(path, key), "expected a number");
            return std::nullopt;
        }
        const double d = v->get<double>();
        if (!std::isfinite(d)) {
            error(join_path(path, key), "must be finite");
            return std::nullopt;
        }
        return d;
    }

    std::optional<double> positive(const json &node, const std::string &path, const std::string &key,
                                   std::optional<double> fallback = std::nullopt)
    {
        auto d = number(node, path, key, fallback);
        if (d && !(*d > 0.0)) {
            error(join_path(path, key), "must be > 0");
            return std::nullopt;
        }
        return d;
    }

    std::optional<long long> integer(const json &node, const std::string &path, const std::string &key,
                                     std::optional<long long> fallback = std::nullopt)
    {
        const json *v = child(node, path, key, !fallback.has_value());
        if (v == nullptr) {
            return fallback;
        }
        if (!v->is_number_integer()) {
            error(join_path(path, key), "expected an integer");
            return std::nullopt;
        }
        return v->get<long long>();
    }

    std::optional<std::string> string(const json &node, const std::string &path, const std::string &key,
                                      std::optional<std::string> fallback = std::nullopt)
    {
        const json *v = child(node, path, key, !fallback.has_value());
        if (v == nullptr) {
            return fallback;
        }
        if (!v->is_string()) {
            error(join_path(path, key), "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const json &node, const std::string &path, const std::string &key,
                                               bool required = true)
    {
        const json *v = child(node, path, key, required);
        if (v == nullptr) {
            return std::nullopt;
        }
        if (!v->is_array()) {
            error(join_path(path, key), "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number()) {
                error(join_path(path, key) + "[" + std::to_string(i) + "]", "expected a number");
                return std::nullopt;
            }
            out.push_back((*v)[i].get<double>());
        }
        return out;
    }

    // [re, im] pair or a bare real number.
    std::optional<cplx> complex(const json &node, const std::string &path, const std::string &key,
                                std::optional<cplx> fallback = std::nullopt)
    {
        const json *v = child(node, path, key, !fallback.has_value());
        if (v == nullptr) {
            return fallback;
        }
        if (v->is_number()) {
            return cplx(v->get<double>(), 0.0);
        }
        if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
            return cplx((*v)[0].get<double>(), (*v)[1].get<double>());
        }
        error(join_path(path, key), "expected a number or a [re, im] pair");
        return std::nullopt;
    }

    // Runs a library constructor; its exception becomes a diagnostic at `path`.
    template <typename Fn>
    auto guard(const std::string &path, Fn &&fn) -> std::optional<decltype(fn())>
    {
        try {
            return fn();
        } catch (const ValidationError &e) {
            error(path, e.what());
        } catch (const PhysicsError &e) {
            error(path, e.what());
        }
        return std::nullopt;
    }

private:
    const json &root_;
    std::vector<Diagnostic> diags_;
};

// ----- builders ----------------------------------------------------------

inline std::map<std::string, FrequencyGrid> read_grids(ConfigReader &r)
{
    std::map<std::string, FrequencyGrid> grids;
    const json *node = r.child(r.root(), "", "grids");
    if (node == nullptr) {
        return grids;
    }
    if (!node->is_object() || node->empty()) {
        r.error("grids", "expected a non-empty object of named grids");
        return grids;
    }
    for (const auto &[name, spec] : node->items()) {
        const std::string path = "grids." + name;
        const auto k_min = r.number(spec, path, "k_min");
        const auto dk = r.number(spec, path, "dk");
        const auto n = r.integer(spec, path, "n");
        if (dk && !(*dk > 0.0)) {
            r.error(path + ".dk", "must be > 0");
            continue;
        }
        if (k_min && !(*k_min > 0.0)) {
            r.error(path + ".k_min", "must be > 0 (all frequencies positive)");
            continue;
        }
        if (n && *n < 2) {
            r.error(path + ".n", "must be >= 2");
            continue;
        }
        if (k_min && dk && n) {
            grids.emplace(name, FrequencyGrid(*k_min, *dk, static_cast<int>(*n)));
        }
    }
    return grids;
}

inline std::optional<FrequencyGrid> grid_ref(ConfigReader &r, const std::map<std::string, FrequencyGrid> &grids,
                                             const json &node, const std::string &path, const std::string &key)
{
    const auto name = r.string(node, path, key);
    if (!name) {
        return std::nullopt;
    }
    const auto it = grids.find(*name);
    if (it == grids.end()) {
        r.error(join_path(path, key), "unknown grid '" + *name + "'");
        return std::nullopt;
    }
    return it->second;
}

inline std::optional<PolarizationVector> read_polarization(ConfigReader &r, const json &node, const std::string &path)
{
    if (!node.is_object()) {
        r.error(path, "expected an object");
        return std::nullopt;
    }
    if (node.contains("angle")) {
        const auto a = r.number(node, path, "angle");
        if (!a) {
            return std::nullopt;
        }
        return PolarizationVector::linear(*a);
    }
    const auto plus = r.complex(node, path, "plus");
    const auto minus = r.complex(node, path, "minus");
    if (!plus || !minus) {
        return std::nullopt;
    }
    const PolarizationVector p{*plus, *minus};
    if (std::abs(p.norm() - 1.0) > 1e-9) {
        r.error(path, "polarization must be normalized (|plus|^2 + |minus|^2 = 1)");
        return std::nullopt;
    }
    return p.normalized();
}

// Spectrum on grid `grid`: gaussian | flat | table.
inline std::optional<SpectralVector> read_spectrum(ConfigReader &r, const FrequencyGrid &grid, const json &node,
                                                   const std::string &path)
{
    const auto shape = r.string(node, path, "shape");
    if (!shape) {
        return std::nullopt;
    }
    if (*shape == "gaussian") {
        const auto center = r.number(node, path, "center");
        const auto width = r.positive(node, path, "width");
        if (!center || !width) {
            return std::nullopt;
        }
        if (!grid.contains(*center)) {
            r.error(path + ".center", "lies outside the grid " + grid.describe());
            return std::nullopt;
        }
        return r.guard(path, [&] { return gaussian_spectrum(grid, *center, *width); });
    }
    if (*shape == "flat") {
        return flat_spectrum(grid);
    }
    if (*shape == "table") {
        const auto re = r.numbers(node, path, "re");
        const auto im = r.numbers(node, path, "im", false);
        if (!re) {
            return std::nullopt;
        }
        if (static_cast<int>(re->size()) != grid.size() || (im && im->size() != re->size())) {
            r.error(path, "table length must equal the grid size " + std::to_string(grid.size()));
            return std::nullopt;
        }
        CVector v(grid.size());
        for (int i = 0; i < grid.size(); ++i) {
            v(i) = cplx((*re)[static_cast<std::size_t>(i)], im ? (*im)[static_cast<std::size_t>(i)] : 0.0);
        }
        return r.guard(path, [&] { return SpectralVector(grid, v).normalized(); });
    }
    r.error(path + ".shape", "unknown spectrum shape '" + *shape + "' (gaussian | flat | table)");
    return std::nullopt;
}

inline std::optional<JointSpectralAmplitude> read_jsa(ConfigReader &r,
                                                      const std::map<std::string, FrequencyGrid> &grids,
                                                      const json &node, const std::string &path)
{
    const auto shape = r.string(node, path, "shape");
    if (!shape) {
        return std::nullopt;
    }
    if (*shape == "correlated-gaussian") {
        const auto ga = grid_ref(r, grids, node, path, "grid_a");
        const auto gb = grid_ref(r, grids, node, path, "grid_b");
        const auto ca = r.number(node, path, "center_a");
        const auto cb = r.number(node, path, "center_b");
        const auto wa = r.positive(node, path, "width_a");
        const auto wb = r.positive(node, path, "width_b");
        const auto corr = r.number(node, path, "correlation", 0.0);
        if (corr && !(std::abs(*corr) < 1.0)) {
            r.error(path + ".correlation", "must lie in (-1, 1)");
            return std::nullopt;
        }
        if (!ga || !gb || !ca || !cb || !wa || !wb || !corr) {
            return std::nullopt;
        }
        return r.guard(path, [&] { return correlated_gaussian_jsa(*ga, *gb, *ca, *cb, *wa, *wb, *corr); });
    }
    if (*shape == "separable") {
        const auto ga = grid_ref(r, grids, node, path, "grid_a");
        const auto gb = grid_ref(r, grids, node, path, "grid_b");
        const json *a = r.child(node, path, "a");
        const json *b = r.child(node, path, "b");
        if (!ga || !gb || a == nullptr || b == nullptr) {
            return std::nullopt;
        }
        const auto sa = read_spectrum(r, *ga, *a, path + ".a");
        const auto sb = read_spectrum(r, *gb, *b, path + ".b");
        if (!sa || !sb) {
            return std::nullopt;
        }
        return separable_jsa(*sa, *sb);
    }
    if (*shape == "epr") {
        const auto gb = grid_ref(r, grids, node, path, "grid_b");
        const auto pump = r.positive(node, path, "pump");
        const json *v = r.child(node, path, "v");
        if (!gb || !pump || v == nullptr) {
            return std::nullopt;
        }
        const auto sv = read_spectrum(r, *gb, *v, path + ".v");
        if (!sv) {
            return std::nullopt;
        }
        if (node.contains("grid_a")) {
            const auto ga = grid_ref(r, grids, node, path, "grid_a");
            if (!ga) {
                return std::nullopt;
            }
            try {
                return epr_amplitude(*ga, *gb, *pump, *sv);
            } catch (const ValidationError &e) {
                r.error(path + ".pump / " + path + ".grid_a", e.what());
                return std::nullopt;
            }
        }
        try {
            return epr_amplitude(*gb, *pump, *sv);
        } catch (const ValidationError &e) {
            r.error(path + ".pump", e.what());
            return std::nullopt;
        }
    }
    if (*shape == "table") {
        const auto ga = grid_ref(r, grids, node, path, "grid_a");
        const auto gb = grid_ref(r, grids, node, path, "grid_b");
        const json *re = r.child(node, path, "re");
        const json *im = r.child(node, path, "im", false);
        if (!ga || !gb || re == nullptr) {
            return std::nullopt;
        }
        CMatrix f(ga->size(), gb->size());
        auto fill = [&](const json &rows, const std::string &p, bool imaginary) {
            if (!rows.is_array() || static_cast<int>(rows.size()) != ga->size()) {
                r.error(p, "expected " + std::to_string(ga->size()) + " rows");
                return false;
            }
            for (int i = 0; i < ga->size(); ++i) {
                const json &row = rows[static_cast<std::size_t>(i)];
                if (!row.is_array() || static_cast<int>(row.size()) != gb->size()) {
                    r.error(p + "[" + std::to_string(i) + "]", "expected " + std::to_string(gb->size()) + " numbers");
                    return false;
                }
                for (int j = 0; j < gb->size(); ++j) {
                    const json &x = row[static_cast<std::size_t>(j)];
                    if (!x.is_number()) {
                        r.error(p + "[" + std::to_string(i) + "][" + std::to_string(j) + "]", "expected a number");
                        return false;
                    }
                    if (imaginary) {
                        f(i, j) += cplx(0.0, x.get<double>());
                    } else {
                        f(i, j) = x.get<double>();
                    }
                }
            }
            return true;
        };
        if (!fill(*re, path + ".re", false) || (im != nullptr && !fill(*im, path + ".im", true))) {
            return std::nullopt;
        }
        return r.guard(path, [&] { return JointSpectralAmplitude(*ga, *gb, f).normalized(); });
    }
    r.error(path + ".shape", "unknown amplitude shape '" + *shape + "' (correlated-gaussian | separable | epr | table)");
    return std::nullopt;
}

// gaussian | delta | flat detector on a named grid.
inline std::optional<DetectorResponse> read_detector(ConfigReader &r,
                                                     const std::map<std::string, FrequencyGrid> &grids,
                                                     const json &node, const std::string &path,
                                                     std::optional<FrequencyGrid> grid_override = std::nullopt)
{
    std::optional<FrequencyGrid> grid = grid_override;
    if (!grid) {
        grid = grid_ref(r, grids, node, path, "grid");
    }
    const auto shape = r.string(node, path, "shape");
    const auto angle = r.number(node, path, "analyzer_angle", 0.0);
    const auto position = r.number(node, path, "position", 0.0);
    if (!grid || !shape || !angle || !position) {
        return std::nullopt;
    }
    const PolarizationVector analyzer = PolarizationVector::linear(*angle);
    if (*shape == "flat") {
        return flat_response(*grid, analyzer, *position);
    }
    if (*shape == "gaussian" || *shape == "delta") {
        const auto center = r.number(node, path, "center");
        const auto width = *shape == "gaussian" ? r.positive(node, path, "width") : std::optional<double>(grid->dk() / 20.0);
        if (!center || !width) {
            return std::nullopt;
        }
        if (!grid->contains(*center)) {
            r.error(path + ".center", "lies outside the grid " + grid->describe());
            return std::nullopt;
        }
        if (*shape == "delta" && !grid->on_grid(*center)) {
            r.error(path + ".center", "delta filter center must be a grid point");
            return std::nullopt;
        }
        return r.guard(path, [&] { return narrow_filter_response(*grid, *center, *width, analyzer, *position); });
    }
    r.error(path + ".shape", "unknown detector shape '" + *shape + "' (gaussian | delta | flat)");
    return std::nullopt;
}

// Window with either an explicit duration or a theta resolved against
// `packet_width` (duration = theta / packet_width).
struct WindowSpec
{
    MeasurementWindow window;
    std::optional<double> theta; // set when given as theta
};

inline std::optional<WindowSpec> read_window(ConfigReader &r, const json &node, const std::string &path,
                                             std::optional<double> packet_width)
{
    const auto center = r.number(node, path, "center", 0.0);
    const bool has_duration = node.is_object() && node.contains("duration");
    const bool has_theta = node.is_object() && node.contains("theta");
    if (has_duration == has_theta) {
        r.error(path, "give exactly one of 'duration' or 'theta'");
        return std::nullopt;
    }
    if (has_duration) {
        const auto d = r.positive(node, path, "duration");
        if (!center || !d) {
            return std::nullopt;
        }
        return WindowSpec{MeasurementWindow(*center, *d), std::nullopt};
    }
    const auto theta = r.positive(node, path, "theta");
    if (!center || !theta || !packet_width) {
        return std::nullopt;
    }
    return WindowSpec{MeasurementWindow(*center, *theta / *packet_width), theta};
}

} // namespace stateprep::cli

#endif // STATEPREP_CLI_CONFIG_HPP
