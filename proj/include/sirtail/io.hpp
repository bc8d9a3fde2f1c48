#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "sirtail/asymquad.hpp"
#include "sirtail/constant.hpp"
#include "sirtail/fading.hpp"
#include "sirtail/ppsampler.hpp"
#include "sirtail/sirmc.hpp"
#include "sirtail/voronoi.hpp"

namespace sirtail {

// --- minimal TOML reader (top-level keys; strings, numbers, booleans,
// inline tables, arrays; '#' comments). Enough for experiment configs.

struct TomlValue;
using TomlTable = std::map<std::string, TomlValue>;

struct TomlValue {
    std::variant<std::string, double, std::int64_t, bool, TomlTable, std::vector<TomlValue>> v;

    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_table() const { return std::holds_alternative<TomlTable>(v); }
    const std::string& as_string() const { return std::get<std::string>(v); }
    const TomlTable& as_table() const { return std::get<TomlTable>(v); }
    const std::vector<TomlValue>& as_array() const { return std::get<std::vector<TomlValue>>(v); }
    double as_double() const;
    std::int64_t as_int() const;
    bool as_bool() const { return std::get<bool>(v); }
};

struct TomlParseError : std::runtime_error {
    TomlParseError(const std::string& what, int line)
        : std::runtime_error("config line " + std::to_string(line) + ": " + what), line(line)
    {
    }
    int line;
};

TomlTable parse_toml(const std::string& text);
TomlTable parse_toml_file(const std::string& path);

// --- descriptor strings <-> domain objects ---

// "poisson:1.0" | "ginibre" | "latticemix:1.5"
ProcessModel parse_model(const std::string& text);
ProcessModel parse_model(const TomlValue& value);

// "rayleigh" | "nakagami:2" | "deterministic" | "gamma:2,0.5"
FadingSpec parse_fading(const std::string& text);
FadingSpec parse_fading(const TomlValue& value);

// --- formatting (locale-independent, 9 significant digits) ---

std::string format_double(double x);

// --- artifact emission ---

void write_tail_csv(std::ostream& os, const TailCurve& curve);
void write_tail_json(std::ostream& os, const TailCurve& curve);
void write_constant_json(std::ostream& os, const std::vector<ConstantEstimate>& estimates);
void write_survival_csv(std::ostream& os, const SurvivalCurve& curve, const ProcessModel& model);
void write_condition_a_json(std::ostream& os, const ConditionAReport& report,
                            const ProcessModel& model, double palm_identity_mc,
                            double palm_identity_quad, double palm_identity_se);

} // namespace sirtail
