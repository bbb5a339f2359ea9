#include "chemoband/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

namespace chemoband::cli {

namespace {

using Scalar = std::variant<double, bool, std::string>;

struct Location {
    std::size_t line = 0;
    std::size_t column = 0;
};

[[noreturn]] void parse_fail(const std::optional<Location>& loc, const std::string& msg)
{
    std::ostringstream os;
    if (loc)
        os << "line " << loc->line << ", column " << loc->column << ": ";
    os << msg;
    throw Error(ErrorCode::ParseError, os.str());
}

double as_number(const Scalar& v, const std::string& key, const std::optional<Location>& loc)
{
    if (const auto* d = std::get_if<double>(&v))
        return *d;
    parse_fail(loc, "'" + key + "' expects a number");
}

std::size_t as_count(const Scalar& v, const std::string& key, const std::optional<Location>& loc)
{
    const double d = as_number(v, key, loc);
    if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e15)
        parse_fail(loc, "'" + key + "' expects a non-negative integer");
    return static_cast<std::size_t>(d);
}

std::string as_string(const Scalar& v, const std::string& key, const std::optional<Location>& loc)
{
    if (const auto* s = std::get_if<std::string>(&v))
        return *s;
    parse_fail(loc, "'" + key + "' expects a string");
}

struct Key {
    std::string section;
    std::string name;
    std::function<void(RunSpec&, const Scalar&, const std::optional<Location>&)> set;
    std::function<nlohmann::json(const RunSpec&)> get;
};

template <class T>
using Accessor = T& (*)(RunSpec&);

Key number_key(std::string section, std::string name, Accessor<double> ref)
{
    const std::string full = section + "." + name;
    return {section, name,
            [ref, full](RunSpec& s, const Scalar& v, const std::optional<Location>& loc) {
                ref(s) = as_number(v, full, loc);
            },
            [ref](const RunSpec& s) { return nlohmann::json(ref(const_cast<RunSpec&>(s))); }};
}

template <class T>
Key count_key(std::string section, std::string name, Accessor<T> ref)
{
    const std::string full = section + "." + name;
    return {section, name,
            [ref, full](RunSpec& s, const Scalar& v, const std::optional<Location>& loc) {
                ref(s) = static_cast<T>(as_count(v, full, loc));
            },
            [ref](const RunSpec& s) { return nlohmann::json(ref(const_cast<RunSpec&>(s))); }};
}

template <class E>
Key enum_key(std::string section, std::string name, Accessor<E> ref,
             std::vector<std::pair<std::string, E>> names)
{
    const std::string full = section + "." + name;
    return {section, name,
            [ref, full, names](RunSpec& s, const Scalar& v, const std::optional<Location>& loc) {
                const std::string text = as_string(v, full, loc);
                for (const auto& [n, e] : names) {
                    if (n == text) {
                        ref(s) = e;
                        return;
                    }
                }
                std::string allowed;
                for (const auto& [n, e] : names)
                    allowed += (allowed.empty() ? "" : ", ") + n;
                parse_fail(loc, "'" + full + "' must be one of: " + allowed);
            },
            [ref, names](const RunSpec& s) {
                const E e = ref(const_cast<RunSpec&>(s));
                for (const auto& [n, val] : names) {
                    if (val == e)
                        return nlohmann::json(n);
                }
                return nlohmann::json(nullptr);
            }};
}

const std::vector<Key>& registry()
{
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        k.push_back(number_key("model", "tau", [](RunSpec& s) -> double& { return s.model.tau; }));
        k.push_back(number_key("model", "mu", [](RunSpec& s) -> double& { return s.model.mu; }));
        k.push_back(number_key("model", "beta", [](RunSpec& s) -> double& { return s.model.beta; }));
        k.push_back(number_key("model", "big_d", [](RunSpec& s) -> double& { return s.model.big_d; }));
        k.push_back(number_key("model", "k", [](RunSpec& s) -> double& { return s.model.k; }));
        k.push_back(enum_key<std::string>("model", "regime", [](RunSpec& s) -> std::string& { return s.regime; },
                                          {{"auto", "auto"},
                                           {"unlimited", "unlimited"},
                                           {"unlimited-general", "unlimited-general"},
                                           {"unlimited-critical", "unlimited-critical"},
                                           {"limited", "limited"}}));

        k.push_back(number_key("band", "c", [](RunSpec& s) -> double& { return s.band.c; }));
        k.push_back(number_key("band", "c0", [](RunSpec& s) -> double& { return s.band.c0; }));
        k.push_back(number_key("band", "v_inf", [](RunSpec& s) -> double& { return s.band.v_inf; }));
        k.push_back(number_key("band", "zeta_min", [](RunSpec& s) -> double& { return s.zeta.zeta_min; }));
        k.push_back(number_key("band", "zeta_max", [](RunSpec& s) -> double& { return s.zeta.zeta_max; }));
        k.push_back(count_key<std::size_t>("band", "n_points",
                                           [](RunSpec& s) -> std::size_t& { return s.zeta.n_points; }));

        k.push_back(number_key("perturb", "u0", [](RunSpec& s) -> double& { return s.perturb.u0; }));
        k.push_back(number_key("perturb", "v0", [](RunSpec& s) -> double& { return s.perturb.v0; }));
        k.push_back(number_key("perturb", "a", [](RunSpec& s) -> double& { return s.perturb.a; }));
        k.push_back(number_key("perturb", "d_deg", [](RunSpec& s) -> double& { return s.perturb.d_deg; }));
        k.push_back(number_key("perturb", "ell", [](RunSpec& s) -> double& { return s.perturb.ell; }));
        k.push_back(count_key<unsigned>("perturb", "n_modes", [](RunSpec& s) -> unsigned& { return s.n_modes; }));
        k.push_back(enum_key<ModeFamily>("perturb", "family", [](RunSpec& s) -> ModeFamily& { return s.family; },
                                         {{"even", ModeFamily::Even},
                                          {"sturm-liouville", ModeFamily::SturmLiouville}}));

        k.push_back(number_key("solver", "x0", [](RunSpec& s) -> double& { return s.solver.x0; }));
        k.push_back(number_key("solver", "x1", [](RunSpec& s) -> double& { return s.solver.x1; }));
        k.push_back(count_key<std::size_t>("solver", "n_nodes",
                                           [](RunSpec& s) -> std::size_t& { return s.solver.n_nodes; }));
        k.push_back(number_key("solver", "dt", [](RunSpec& s) -> double& { return s.solver.dt; }));
        k.push_back(number_key("solver", "t_end", [](RunSpec& s) -> double& { return s.solver.t_end; }));
        k.push_back(enum_key<Scheme>("solver", "scheme", [](RunSpec& s) -> Scheme& { return s.solver.scheme; },
                                     {{"semi-implicit", Scheme::SemiImplicit},
                                      {"fully-explicit", Scheme::FullyExplicit}}));
        k.push_back(count_key<int>("solver", "order", [](RunSpec& s) -> int& { return s.solver.order; }));
        k.push_back(number_key("solver", "v_floor", [](RunSpec& s) -> double& { return s.solver.v_floor; }));
        k.push_back(enum_key<TauConvention>(
            "solver", "tau_convention", [](RunSpec& s) -> TauConvention& { return s.solver.tau_convention; },
            {{"unit-substrate", TauConvention::UnitSubstrate}, {"common", TauConvention::Common}}));
        k.push_back(enum_key<Coupling>("solver", "coupling", [](RunSpec& s) -> Coupling& { return s.solver.coupling; },
                                       {{"implicit-block", Coupling::ImplicitBlock},
                                        {"explicit-reaction", Coupling::ExplicitReaction}}));
        k.push_back(count_key<std::size_t>("solver", "snapshot_every",
                                           [](RunSpec& s) -> std::size_t& { return s.solver.snapshot_every; }));
        k.push_back(enum_key<std::string>("solver", "consumption",
                                          [](RunSpec& s) -> std::string& { return s.solver.consumption; },
                                          {{"auto", "auto"},
                                           {"none", "none"},
                                           {"unlimited", "unlimited"},
                                           {"limited", "limited"}}));

        k.push_back(count_key<std::uint64_t>("run", "seed", [](RunSpec& s) -> std::uint64_t& { return s.run.seed; }));
        k.push_back(enum_key<OutputFormat>("run", "format", [](RunSpec& s) -> OutputFormat& { return s.run.format; },
                                           {{"csv", OutputFormat::Csv}, {"json", OutputFormat::Json}}));
        k.push_back(number_key("run", "quad_rel_tol", [](RunSpec& s) -> double& { return s.run.quad_rel_tol; }));
        k.push_back(number_key("run", "ode_zeta_start", [](RunSpec& s) -> double& { return s.run.ode_zeta_start; }));
        k.push_back(number_key("run", "ode_ic_u", [](RunSpec& s) -> double& { return s.run.ode_ic_u; }));
        k.push_back(count_key<std::size_t>("run", "n_pairs", [](RunSpec& s) -> std::size_t& { return s.run.n_pairs; }));
        k.push_back(number_key("run", "box_rel_width", [](RunSpec& s) -> double& { return s.run.box_rel_width; }));
        k.push_back(number_key("run", "delta0", [](RunSpec& s) -> double& { return s.run.delta0; }));
        k.push_back(count_key<std::size_t>("run", "n_deltas", [](RunSpec& s) -> std::size_t& { return s.run.n_deltas; }));
        k.push_back(count_key<std::size_t>("run", "n_particles",
                                           [](RunSpec& s) -> std::size_t& { return s.run.n_particles; }));
        k.push_back(count_key<std::size_t>("run", "walk_steps",
                                           [](RunSpec& s) -> std::size_t& { return s.run.walk_steps; }));
        k.push_back(number_key("run", "walk_start_sd", [](RunSpec& s) -> double& { return s.run.walk_start_sd; }));
        k.push_back(number_key("run", "walk_variance", [](RunSpec& s) -> double& { return s.run.walk_variance; }));
        k.push_back(count_key<std::size_t>("run", "n_bins", [](RunSpec& s) -> std::size_t& { return s.run.n_bins; }));
        return k;
    }();
    return keys;
}

bool known_section(std::string_view s)
{
    return s == "model" || s == "band" || s == "perturb" || s == "solver" || s == "run";
}

/// Applies one key. `d` under [model] is kept aside and turned into beta once
/// the whole document has been read, so it does not depend on key order.
void apply(RunSpec& spec, std::optional<double>& d_override, const std::string& section, const std::string& name,
           const Scalar& value, const std::optional<Location>& loc)
{
    if (section == "model" && name == "d") {
        d_override = as_number(value, "model.d", loc);
        return;
    }
    for (const Key& k : registry()) {
        if (k.section == section && k.name == name) {
            k.set(spec, value, loc);
            return;
        }
    }
    parse_fail(loc, "unknown key '" + name + "' in section [" + section + "]");
}

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

Scalar ini_value(std::string_view raw, const Location& loc)
{
    if (raw.empty())
        parse_fail(loc, "missing value");
    if (raw.front() == '"') {
        const auto close = raw.find('"', 1);
        if (close == std::string_view::npos)
            parse_fail(loc, "unterminated string");
        if (!trim(raw.substr(close + 1)).empty())
            parse_fail(Location{loc.line, loc.column + close + 1}, "unexpected text after string");
        return std::string(raw.substr(1, close - 1));
    }
    if (raw == "true")
        return true;
    if (raw == "false")
        return false;
    double d = 0.0;
    const char* first = raw.data();
    const char* last = raw.data() + raw.size();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, d);
    if (ec == std::errc() && ptr == last)
        return d;
    return std::string(raw);
}

void parse_ini(std::string_view text, RunSpec& spec, std::optional<double>& d_override)
{
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        ++line_no;
        const std::size_t line_start = pos;
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;

        // Strip a comment that starts the line or follows whitespace, unless
        // it sits inside a quoted string.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                quoted = !quoted;
            else if (!quoted && (line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line = line.substr(0, i);
                break;
            }
        }
        const std::string_view body = trim(line);
        if (body.empty())
            continue;
        const std::size_t col = static_cast<std::size_t>(body.data() - text.data()) - line_start + 1;
        const Location loc{line_no, col};

        if (body.front() == '[') {
            if (body.back() != ']')
                parse_fail(loc, "section header is missing ']'");
            const std::string name(trim(body.substr(1, body.size() - 2)));
            if (!known_section(name))
                parse_fail(loc, "unknown section [" + name + "]");
            section = name;
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            parse_fail(loc, "expected 'key = value'");
        const std::string key(trim(body.substr(0, eq)));
        if (key.empty())
            parse_fail(loc, "empty key");
        if (section.empty())
            parse_fail(loc, "key '" + key + "' appears before any section");
        const std::string_view after = body.substr(eq + 1);
        const std::string_view raw = trim(after);
        const std::size_t vcol = raw.empty() ? col + eq + 1 : col + static_cast<std::size_t>(raw.data() - body.data());
        apply(spec, d_override, section, key, ini_value(raw, Location{line_no, vcol}), Location{line_no, col});
    }
}

Location location_of(std::string_view text, std::size_t byte)
{
    Location loc{1, 1};
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++loc.line;
            loc.column = 1;
        } else {
            ++loc.column;
        }
    }
    return loc;
}

void parse_json(std::string_view text, RunSpec& spec, std::optional<double>& d_override)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        std::string what = e.what();
        const auto colon = what.rfind(": ");
        parse_fail(location_of(text, byte), colon == std::string::npos ? what : what.substr(colon + 2));
    }
    if (!doc.is_object())
        parse_fail(std::nullopt, "top level of a JSON spec must be an object");
    for (const auto& [section, body] : doc.items()) {
        if (!known_section(section))
            parse_fail(std::nullopt, "unknown section '" + section + "'");
        if (!body.is_object())
            parse_fail(std::nullopt, "section '" + section + "' must be an object");
        for (const auto& [name, value] : body.items()) {
            Scalar v;
            if (value.is_number())
                v = value.get<double>();
            else if (value.is_boolean())
                v = value.get<bool>();
            else if (value.is_string())
                v = value.get<std::string>();
            else
                parse_fail(std::nullopt, "'" + section + "." + name + "' must be a number, boolean or string");
            apply(spec, d_override, section, name, v, std::nullopt);
        }
    }
}

[[noreturn]] void invalid(const std::string& field, const std::string& msg)
{
    throw Error(ErrorCode::ValidationError, "'" + field + "' " + msg, field);
}

} // namespace

void RunSpec::resolve_regime()
{
    const double d = model.d_ratio();
    if (regime == "limited")
        band.regime = Regime::Limited;
    else if (regime == "unlimited-general")
        band.regime = Regime::UnlimitedGeneral;
    else if (regime == "unlimited-critical")
        band.regime = Regime::UnlimitedCritical;
    else
        band.regime = unlimited_regime_for(d);
}

Consumption RunSpec::consumption() const
{
    if (solver.consumption == "none")
        return Consumption::None;
    if (solver.consumption == "unlimited")
        return Consumption::Unlimited;
    if (solver.consumption == "limited")
        return Consumption::Limited;
    return band.regime == Regime::Limited ? Consumption::Limited : Consumption::Unlimited;
}

std::vector<std::string> preset_names()
{
    return {"table1", "limited", "dispersion", "energy"};
}

RunSpec preset(std::string_view name)
{
    RunSpec s;
    if (name == "table1") {
        // defaults
    } else if (name == "limited") {
        s.model.beta = 0.25;
        s.regime = "limited";
    } else if (name == "dispersion") {
        s.model = ModelParams{0.05, 0.25, 0.25, 0.1, 1.0};
        s.perturb = PerturbParams{1.0, 1.0, 1.0, 0.5, 1.0};
        s.solver.x0 = 0.0;
        s.solver.x1 = 1.0;
        s.solver.n_nodes = 401;
        s.solver.dt = 1e-4;
        s.solver.t_end = 0.5;
    } else if (name == "energy") {
        s.model = ModelParams{0.05, 0.25, 0.05, 0.1, 1.0};
        s.perturb = PerturbParams{1.0, 1.0, 0.05, 0.5, 1.0};
        s.solver.x0 = 0.0;
        s.solver.x1 = 1.0;
        s.solver.n_nodes = 401;
        s.solver.dt = 1e-3;
        s.solver.t_end = 3.0;
    } else {
        throw Error(ErrorCode::ValidationError, "unknown preset '" + std::string(name) + "'", "preset");
    }
    s.resolve_regime();
    return s;
}

RunSpec parse_config_text(std::string_view text, RunSpec base)
{
    std::optional<double> d_override;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{')
        parse_json(text, base, d_override);
    else
        parse_ini(text, base, d_override);
    if (d_override)
        base.model.beta = 0.5 * *d_override * base.model.mu;
    base.resolve_regime();
    validate_spec(base);
    return base;
}

RunSpec parse_config_file(const std::string& path, RunSpec base)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open config file '" + path + "'", "config");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), std::move(base));
}

void validate_spec(const RunSpec& spec)
{
    const auto positive = [](double v, const char* field) {
        if (!(v > 0.0) || !std::isfinite(v))
            invalid(field, "must be strictly positive");
    };
    positive(spec.model.tau, "tau");
    positive(spec.model.mu, "mu");
    positive(spec.model.beta, "beta");
    if (!(spec.model.big_d >= 0.0) || !std::isfinite(spec.model.big_d))
        invalid("big_d", "must be non-negative");
    positive(spec.model.k, "k");
    positive(spec.band.c, "c");
    positive(spec.band.c0, "c0");
    positive(spec.band.v_inf, "v_inf");
    if (!(spec.zeta.zeta_max > spec.zeta.zeta_min))
        invalid("zeta_max", "must exceed zeta_min");
    if (spec.zeta.n_points < 2)
        invalid("n_points", "must be at least 2");
    positive(spec.perturb.u0, "u0");
    positive(spec.perturb.v0, "v0");
    positive(spec.perturb.a, "a");
    positive(spec.perturb.d_deg, "d_deg");
    positive(spec.perturb.ell, "ell");
    if (spec.n_modes == 0)
        invalid("n_modes", "must be at least 1");
    if (!(spec.solver.x1 > spec.solver.x0))
        invalid("x1", "must exceed x0");
    if (spec.solver.n_nodes < 3)
        invalid("n_nodes", "must be at least 3");
    if (!(spec.solver.dt >= 0.0))
        invalid("dt", "must be non-negative");
    if (!(spec.solver.t_end >= 0.0))
        invalid("t_end", "must be non-negative");
    if (spec.solver.order != 1 && spec.solver.order != 2)
        invalid("order", "must be 1 or 2");
    positive(spec.solver.v_floor, "v_floor");
    positive(spec.run.quad_rel_tol, "quad_rel_tol");
    if (!(spec.run.box_rel_width > 0.0 && spec.run.box_rel_width < 1.0))
        invalid("box_rel_width", "must lie in (0, 1)");
    positive(spec.run.delta0, "delta0");
    if (spec.run.n_deltas == 0)
        invalid("n_deltas", "must be at least 1");
    if (spec.run.n_particles == 0)
        invalid("n_particles", "must be at least 1");
    positive(spec.run.walk_start_sd, "walk_start_sd");
    if (!(spec.run.walk_variance >= 0.0))
        invalid("walk_variance", "must be non-negative");
    if (!(spec.run.ode_ic_u >= 0.0))
        invalid("ode_ic_u", "must be non-negative");
}

nlohmann::json to_json(const RunSpec& spec)
{
    nlohmann::json j = nlohmann::json::object();
    for (const Key& k : registry())
        j[k.section][k.name] = k.get(spec);
    return j;
}

} // namespace chemoband::cli
