#include "sirtail/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sirtail {

double TomlValue::as_double() const
{
    if (std::holds_alternative<double>(v))
        return std::get<double>(v);
    if (std::holds_alternative<std::int64_t>(v))
        return static_cast<double>(std::get<std::int64_t>(v));
    throw std::runtime_error("config: expected a number");
}

std::int64_t TomlValue::as_int() const
{
    if (std::holds_alternative<std::int64_t>(v))
        return std::get<std::int64_t>(v);
    if (std::holds_alternative<double>(v)) {
        const double d = std::get<double>(v);
        if (d == std::floor(d))
            return static_cast<std::int64_t>(d);
    }
    throw std::runtime_error("config: expected an integer");
}

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;

    bool done() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take()
    {
        const char c = text[pos++];
        if (c == '\n')
            ++line;
        return c;
    }
    void skip_ws_inline()
    {
        while (!done() && (peek() == ' ' || peek() == '\t'))
            ++pos;
    }
    void skip_ws_and_comments()
    {
        while (!done()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                take();
            } else if (c == '#') {
                while (!done() && peek() != '\n')
                    ++pos;
            } else {
                break;
            }
        }
    }
};

bool is_bare_key_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

TomlValue parse_value(Cursor& cur);

std::string parse_key(Cursor& cur)
{
    cur.skip_ws_inline();
    std::string key;
    if (!cur.done() && cur.peek() == '"') {
        cur.take();
        while (!cur.done() && cur.peek() != '"')
            key.push_back(cur.take());
        if (cur.done())
            throw TomlParseError("unterminated quoted key", cur.line);
        cur.take();
        return key;
    }
    while (!cur.done() && is_bare_key_char(cur.peek()))
        key.push_back(cur.take());
    if (key.empty())
        throw TomlParseError("expected a key", cur.line);
    return key;
}

TomlValue parse_string(Cursor& cur)
{
    cur.take(); // opening quote
    std::string s;
    while (!cur.done() && cur.peek() != '"') {
        char c = cur.take();
        if (c == '\\' && !cur.done()) {
            const char esc = cur.take();
            switch (esc) {
            case 'n': c = '\n'; break;
            case 't': c = '\t'; break;
            case '"': c = '"'; break;
            case '\\': c = '\\'; break;
            default: throw TomlParseError("unsupported escape", cur.line);
            }
        }
        s.push_back(c);
    }
    if (cur.done())
        throw TomlParseError("unterminated string", cur.line);
    cur.take();
    return TomlValue{s};
}

TomlValue parse_number_or_bool(Cursor& cur)
{
    std::string tok;
    while (!cur.done()) {
        const char c = cur.peek();
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' ||
            c == '_')
            tok.push_back(cur.take());
        else
            break;
    }
    if (tok == "true")
        return TomlValue{true};
    if (tok == "false")
        return TomlValue{false};
    std::string digits;
    for (const char c : tok)
        if (c != '_')
            digits.push_back(c);
    if (digits.empty())
        throw TomlParseError("expected a value", cur.line);
    const bool is_float = digits.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
        std::int64_t iv = 0;
        const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), iv);
        if (ec == std::errc() && p == digits.data() + digits.size())
            return TomlValue{iv};
    }
    double dv = 0.0;
    const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dv);
    if (ec != std::errc() || p != digits.data() + digits.size())
        throw TomlParseError("malformed number '" + tok + "'", cur.line);
    return TomlValue{dv};
}

TomlValue parse_inline_table(Cursor& cur)
{
    cur.take(); // '{'
    TomlTable table;
    cur.skip_ws_inline();
    if (!cur.done() && cur.peek() == '}') {
        cur.take();
        return TomlValue{table};
    }
    for (;;) {
        const std::string key = parse_key(cur);
        cur.skip_ws_inline();
        if (cur.done() || cur.take() != '=')
            throw TomlParseError("expected '=' in inline table", cur.line);
        cur.skip_ws_inline();
        table[key] = parse_value(cur);
        cur.skip_ws_inline();
        if (cur.done())
            throw TomlParseError("unterminated inline table", cur.line);
        const char c = cur.take();
        if (c == '}')
            break;
        if (c != ',')
            throw TomlParseError("expected ',' or '}' in inline table", cur.line);
        cur.skip_ws_inline();
    }
    return TomlValue{table};
}

TomlValue parse_array(Cursor& cur)
{
    cur.take(); // '['
    std::vector<TomlValue> items;
    cur.skip_ws_and_comments();
    if (!cur.done() && cur.peek() == ']') {
        cur.take();
        return TomlValue{items};
    }
    for (;;) {
        items.push_back(parse_value(cur));
        cur.skip_ws_and_comments();
        if (cur.done())
            throw TomlParseError("unterminated array", cur.line);
        const char c = cur.take();
        if (c == ']')
            break;
        if (c != ',')
            throw TomlParseError("expected ',' or ']' in array", cur.line);
        cur.skip_ws_and_comments();
    }
    return TomlValue{items};
}

TomlValue parse_value(Cursor& cur)
{
    cur.skip_ws_inline();
    if (cur.done())
        throw TomlParseError("expected a value", cur.line);
    const char c = cur.peek();
    if (c == '"')
        return parse_string(cur);
    if (c == '{')
        return parse_inline_table(cur);
    if (c == '[')
        return parse_array(cur);
    return parse_number_or_bool(cur);
}

} // namespace

TomlTable parse_toml(const std::string& text)
{
    Cursor cur{text};
    TomlTable table;
    for (;;) {
        cur.skip_ws_and_comments();
        if (cur.done())
            break;
        const std::string key = parse_key(cur);
        cur.skip_ws_inline();
        if (cur.done() || cur.take() != '=')
            throw TomlParseError("expected '=' after key '" + key + "'", cur.line);
        table[key] = parse_value(cur);
        cur.skip_ws_inline();
        if (!cur.done() && cur.peek() == '#')
            while (!cur.done() && cur.peek() != '\n')
                cur.take();
        if (!cur.done() && cur.peek() != '\n' && cur.peek() != '\r')
            throw TomlParseError("trailing characters after value for '" + key + "'", cur.line);
    }
    return table;
}

TomlTable parse_toml_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_toml(ss.str());
}

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    for (const char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

double parse_double_str(const std::string& s, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse " + what + " from '" + s + "'");
    }
}

} // namespace

ProcessModel parse_model(const std::string& text)
{
    const auto parts = split(text, ':');
    const std::string& kind = parts[0];
    if (kind == "poisson") {
        if (parts.size() != 2)
            throw std::invalid_argument("model: poisson needs an intensity, e.g. poisson:1.0");
        return ProcessModel::poisson(parse_double_str(parts[1], "poisson intensity"));
    }
    if (kind == "ginibre") {
        if (parts.size() != 1)
            throw std::invalid_argument("model: ginibre takes no parameter");
        return ProcessModel::ginibre();
    }
    if (kind == "latticemix") {
        if (parts.size() != 2)
            throw std::invalid_argument("model: latticemix needs a shape, e.g. latticemix:1.5");
        return ProcessModel::lattice_mix(parse_double_str(parts[1], "lattice shape"));
    }
    throw std::invalid_argument("model: unknown kind '" + kind + "'");
}

ProcessModel parse_model(const TomlValue& value)
{
    if (value.is_string())
        return parse_model(value.as_string());
    const auto& t = value.as_table();
    const auto kind = t.find("kind");
    if (kind == t.end() || !kind->second.is_string())
        throw std::invalid_argument("model: table form needs kind = \"...\"");
    const std::string& k = kind->second.as_string();
    if (k == "poisson")
        return ProcessModel::poisson(t.at("lambda").as_double());
    if (k == "ginibre")
        return ProcessModel::ginibre();
    if (k == "latticemix")
        return ProcessModel::lattice_mix(t.at("a").as_double());
    throw std::invalid_argument("model: unknown kind '" + k + "'");
}

FadingSpec parse_fading(const std::string& text)
{
    const auto parts = split(text, ':');
    const std::string& kind = parts[0];
    if (kind == "rayleigh") {
        if (parts.size() != 1)
            throw std::invalid_argument("fading: rayleigh takes no parameter");
        return FadingSpec::rayleigh();
    }
    if (kind == "deterministic" || kind == "delta1") {
        if (parts.size() != 1)
            throw std::invalid_argument("fading: deterministic takes no parameter");
        return FadingSpec::deterministic();
    }
    if (kind == "nakagami") {
        if (parts.size() != 2)
            throw std::invalid_argument("fading: nakagami needs m, e.g. nakagami:2");
        return FadingSpec::nakagami(parse_double_str(parts[1], "nakagami m"));
    }
    if (kind == "gamma") {
        if (parts.size() != 2)
            throw std::invalid_argument("fading: gamma needs shape,scale, e.g. gamma:2,0.5");
        const auto ps = split(parts[1], ',');
        if (ps.size() != 2)
            throw std::invalid_argument("fading: gamma needs shape,scale, e.g. gamma:2,0.5");
        return FadingSpec::gamma_dist(parse_double_str(ps[0], "gamma shape"),
                                      parse_double_str(ps[1], "gamma scale"));
    }
    throw std::invalid_argument("fading: unknown kind '" + kind + "'");
}

FadingSpec parse_fading(const TomlValue& value)
{
    if (value.is_string())
        return parse_fading(value.as_string());
    const auto& t = value.as_table();
    const auto kind = t.find("kind");
    if (kind == t.end() || !kind->second.is_string())
        throw std::invalid_argument("fading: table form needs kind = \"...\"");
    const std::string& k = kind->second.as_string();
    if (k == "rayleigh")
        return FadingSpec::rayleigh();
    if (k == "deterministic" || k == "delta1")
        return FadingSpec::deterministic();
    if (k == "nakagami")
        return FadingSpec::nakagami(t.at("m").as_double());
    if (k == "gamma")
        return FadingSpec::gamma_dist(t.at("shape").as_double(), t.at("scale").as_double());
    throw std::invalid_argument("fading: unknown kind '" + k + "'");
}

std::string format_double(double x)
{
    char buf[40];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 9);
    if (ec != std::errc())
        return "nan";
    return std::string(buf, p);
}

namespace {

// Doubles rounded to 9 significant digits before JSON insertion so that
// artifacts are reproducible and match the printed precision.
nlohmann::json jnum(double x)
{
    double y = x;
    const std::string s = format_double(x);
    std::from_chars(s.data(), s.data() + s.size(), y);
    return y;
}

nlohmann::json constant_to_json(const ConstantEstimate& c)
{
    nlohmann::json j;
    j["value"] = jnum(c.value);
    j["std_error"] = jnum(c.std_error);
    j["bracket_low"] = jnum(c.bracket_low);
    j["bracket_high"] = jnum(c.bracket_high);
    j["method"] = c.method;
    j["beta"] = jnum(c.beta);
    j["model"] = c.model;
    j["fading"] = c.fading;
    if (c.n_samples)
        j["n_samples"] = c.n_samples;
    if (c.n_points)
        j["n_points"] = c.n_points;
    return j;
}

} // namespace

void write_tail_csv(std::ostream& os, const TailCurve& curve)
{
    os << "theta,p_hat,ci_low,ci_high,scaled\n";
    for (const auto& e : curve.entries)
        os << format_double(e.theta) << ',' << format_double(e.p_hat) << ','
           << format_double(e.ci_low) << ',' << format_double(e.ci_high) << ','
           << format_double(e.scaled) << '\n';
}

void write_tail_json(std::ostream& os, const TailCurve& curve)
{
    nlohmann::json j;
    j["beta"] = jnum(curve.beta);
    j["model"] = curve.model.describe();
    j["fading"] = curve.fading.describe();
    j["n_samples"] = curve.n_samples;
    j["n_points"] = curve.n_points;
    j["seed"] = curve.seed;
    auto& entries = j["entries"] = nlohmann::json::array();
    for (const auto& e : curve.entries) {
        nlohmann::json je;
        je["theta"] = jnum(e.theta);
        je["p_hat"] = jnum(e.p_hat);
        je["ci_low"] = jnum(e.ci_low);
        je["ci_high"] = jnum(e.ci_high);
        je["scaled"] = jnum(e.scaled);
        je["p_hat_uncorrected"] = jnum(e.p_hat_uncorrected);
        entries.push_back(je);
    }
    os << j.dump(2) << '\n';
}

void write_constant_json(std::ostream& os, const std::vector<ConstantEstimate>& estimates)
{
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : estimates)
        j.push_back(constant_to_json(c));
    if (estimates.size() == 2) {
        nlohmann::json wrap;
        wrap["estimates"] = j;
        const double gap = std::abs(estimates[0].value - estimates[1].value);
        const double se = std::sqrt(estimates[0].std_error * estimates[0].std_error +
                                    estimates[1].std_error * estimates[1].std_error);
        wrap["gap"] = jnum(gap);
        wrap["combined_std_error"] = jnum(se);
        os << wrap.dump(2) << '\n';
        return;
    }
    os << j.dump(2) << '\n';
}

void write_survival_csv(std::ostream& os, const SurvivalCurve& curve, const ProcessModel& model)
{
    os << "r,empirical,ci_high,calka,calka_valid,ginibre_petal,generic_petal\n";
    for (std::size_t i = 0; i < curve.r_grid.size(); ++i) {
        const double r = curve.r_grid[i];
        const double lambda = model.intensity();
        const auto calka = calka_poisson_bound(lambda, r);
        os << format_double(r) << ',' << format_double(curve.survival[i]) << ','
           << format_double(curve.ci_high[i]) << ',' << format_double(calka.value) << ','
           << (calka.valid ? 1 : 0) << ',' << format_double(ginibre_petal_bound(r)) << ','
           << format_double(generic_petal_bound(lambda, r)) << '\n';
    }
}

void write_condition_a_json(std::ostream& os, const ConditionAReport& report,
                            const ProcessModel& model, double palm_identity_mc,
                            double palm_identity_quad, double palm_identity_se)
{
    nlohmann::json j;
    j["model"] = model.describe();
    j["verdict"] = report.verdict;
    j["analytic_infinite_cell_radius_sq"] = report.analytic_infinite;
    j["discard_rate"] = jnum(report.discard_rate);
    auto levels_json = [](const RunningMeans& rm) {
        nlohmann::json out = nlohmann::json::array();
        for (std::size_t i = 0; i < rm.levels.size() && i < rm.means.size(); ++i) {
            nlohmann::json e;
            e["n"] = rm.levels[i];
            e["mean"] = jnum(rm.means[i]);
            out.push_back(e);
        }
        return out;
    };
    j["cell_radius_sq"] = levels_json(report.cell_radius_sq);
    auto& dists = j["distance_sq"] = nlohmann::json::array();
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
        nlohmann::json e;
        e["k"] = report.ks[i];
        e["running_means"] = levels_json(report.distance_sq[i]);
        dists.push_back(e);
    }
    if (palm_identity_se >= 0.0) {
        nlohmann::json pid;
        pid["mc"] = jnum(palm_identity_mc);
        pid["quadrature"] = jnum(palm_identity_quad);
        pid["mc_std_error"] = jnum(palm_identity_se);
        j["palm_identity"] = pid;
    }
    os << j.dump(2) << '\n';
}

} // namespace sirtail
