#include "engine/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "engine/errors.hpp"

namespace engine::config {

namespace {

// ---------------------------------------------------------------------------
// Minimal TOML-compatible reader: [section] headers, key = value lines with
// integers, floats, booleans, quoted strings and (nested) inline arrays.
// ---------------------------------------------------------------------------

struct TomlValue {
    enum class Kind { integer, real, string, boolean, array };
    Kind kind = Kind::integer;
    long long i = 0;
    double d = 0.0;
    std::string s;
    bool b = false;
    std::vector<TomlValue> items;

    double as_number(const std::string& where) const {
        if (kind == Kind::integer) return static_cast<double>(i);
        if (kind == Kind::real) return d;
        if (kind == Kind::string && s == "max") return std::numeric_limits<double>::infinity();
        throw ConfigError("config: expected a number at " + where);
    }
    long long as_integer(const std::string& where) const {
        if (kind == Kind::integer) return i;
        throw ConfigError("config: expected an integer at " + where);
    }
    const std::string& as_string(const std::string& where) const {
        if (kind == Kind::string) return s;
        throw ConfigError("config: expected a string at " + where);
    }
    bool as_bool(const std::string& where) const {
        if (kind == Kind::boolean) return b;
        throw ConfigError("config: expected a boolean at " + where);
    }
    const std::vector<TomlValue>& as_array(const std::string& where) const {
        if (kind == Kind::array) return items;
        throw ConfigError("config: expected an array at " + where);
    }
};

using Section = std::map<std::string, TomlValue>;
using Document = std::map<std::string, Section>;

class ValueParser {
public:
    explicit ValueParser(const std::string& text) : text_(text) {}

    TomlValue parse() {
        TomlValue v = parse_value();
        skip_ws();
        if (pos_ != text_.size()) throw ConfigError("config: trailing characters after value: " + text_);
        return v;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r')) {
            ++pos_;
        }
    }

    TomlValue parse_value() {
        skip_ws();
        if (pos_ >= text_.size()) throw ConfigError("config: missing value");
        const char c = text_[pos_];
        if (c == '[') return parse_array();
        if (c == '"') return parse_string();
        if (text_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            TomlValue v;
            v.kind = TomlValue::Kind::boolean;
            v.b = true;
            return v;
        }
        if (text_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            TomlValue v;
            v.kind = TomlValue::Kind::boolean;
            v.b = false;
            return v;
        }
        return parse_number();
    }

    TomlValue parse_array() {
        ++pos_; // '['
        TomlValue v;
        v.kind = TomlValue::Kind::array;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return v;
        }
        for (;;) {
            v.items.push_back(parse_value());
            skip_ws();
            if (pos_ >= text_.size()) throw ConfigError("config: unterminated array");
            if (text_[pos_] == ',') {
                ++pos_;
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == ']') { // trailing comma
                    ++pos_;
                    return v;
                }
                continue;
            }
            if (text_[pos_] == ']') {
                ++pos_;
                return v;
            }
            throw ConfigError("config: expected ',' or ']' in array");
        }
    }

    TomlValue parse_string() {
        ++pos_; // '"'
        TomlValue v;
        v.kind = TomlValue::Kind::string;
        while (pos_ < text_.size() && text_[pos_] != '"') {
            char c = text_[pos_];
            if (c == '\\' && pos_ + 1 < text_.size()) {
                ++pos_;
                c = text_[pos_];
                if (c == 'n') c = '\n';
                if (c == 't') c = '\t';
            }
            v.s += c;
            ++pos_;
        }
        if (pos_ >= text_.size()) throw ConfigError("config: unterminated string");
        ++pos_;
        return v;
    }

    TomlValue parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '+' || text_[pos_] == '-' || text_[pos_] == '.')) {
            ++pos_;
        }
        const std::string tok = text_.substr(start, pos_ - start);
        if (tok.empty()) throw ConfigError("config: malformed value: " + text_.substr(start));
        TomlValue v;
        const bool is_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "-inf";
        if (!is_float) {
            long long out = 0;
            const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
            if (ec == std::errc() && p == tok.data() + tok.size()) {
                v.kind = TomlValue::Kind::integer;
                v.i = out;
                return v;
            }
        }
        char* end = nullptr;
        const double d = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) throw ConfigError("config: malformed number: " + tok);
        v.kind = TomlValue::Kind::real;
        v.d = d;
        return v;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Removes a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

int bracket_balance(const std::string& s) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (in_string) continue;
        if (c == '[') ++depth;
        if (c == ']') --depth;
    }
    return depth;
}

Document parse_document(const std::string& text) {
    Document doc;
    std::string section;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = strip(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config: malformed section header: " + line);
            section = strip(line.substr(1, line.size() - 2));
            doc[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config: expected key = value: " + line);
        const std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        // multi-line arrays: keep reading until brackets balance
        while (bracket_balance(value) > 0) {
            std::string more;
            if (!std::getline(in, more)) throw ConfigError("config: unterminated array for key " + key);
            value += ' ';
            value += strip(strip_comment(more));
        }
        doc[section][key] = ValueParser(value).parse();
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "\"max\"" : "\"-max\"";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s = buf;
    // keep floats recognizably float
    if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos &&
        s.find("nan") == std::string::npos) {
        s += ".0";
    }
    return s;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

std::string copula_str(const stochastics::CopulaSpec& c) {
    const char* family = (c.family == stochastics::CopulaSpec::Family::amh) ? "amh" : "frank";
    return std::string("[") + quote(family) + ", " + fmt(c.theta) + "]";
}

stochastics::CopulaSpec copula_from(const TomlValue& v, const std::string& where) {
    const auto& items = v.as_array(where);
    if (items.size() != 2) throw ConfigError("config: copula must be [family, theta] at " + where);
    const std::string family = items[0].as_string(where);
    const double theta = items[1].as_number(where);
    if (family == "amh") return stochastics::CopulaSpec::amh(theta);
    if (family == "frank") return stochastics::CopulaSpec::frank(theta);
    throw ConfigError("config: unknown copula family '" + family + "' at " + where);
}

void serialize_model(std::ostream& out, const char* section, const model::ModelSpec& spec) {
    out << "[" << section << "]\n";
    out << "intercept = " << fmt(spec.intercept) << "\n";
    if (spec.offset_feature) out << "offset = " << quote(*spec.offset_feature) << "\n";
    out << "terms = [\n";
    for (const auto& t : spec.terms) {
        out << "  [" << quote(t.feature);
        if (t.level) out << ", " << quote(*t.level);
        out << ", " << fmt(t.coefficient) << "],\n";
    }
    out << "]\n\n";
}

model::ModelSpec model_from(const Section& section, const std::string& name) {
    model::ModelSpec spec;
    for (const auto& [key, value] : section) {
        const std::string where = name + "." + key;
        if (key == "intercept") {
            spec.intercept = value.as_number(where);
        } else if (key == "offset") {
            spec.offset_feature = value.as_string(where);
        } else if (key == "terms") {
            for (const TomlValue& item : value.as_array(where)) {
                const auto& triple = item.as_array(where);
                if (triple.size() == 2) {
                    spec.terms.push_back({triple[0].as_string(where), std::nullopt,
                                          triple[1].as_number(where)});
                } else if (triple.size() == 3) {
                    spec.terms.push_back({triple[0].as_string(where), triple[1].as_string(where),
                                          triple[2].as_number(where)});
                } else {
                    throw ConfigError("config: model terms are [feature, coefficient] or "
                                      "[feature, level, coefficient] at " +
                                      where);
                }
            }
        } else {
            throw ConfigError("config: unknown key '" + key + "' in [" + name + "]");
        }
    }
    return spec;
}

std::vector<double> numbers_from(const TomlValue& v, const std::string& where) {
    std::vector<double> out;
    for (const TomlValue& item : v.as_array(where)) out.push_back(item.as_number(where));
    return out;
}

std::string numbers_str(std::span<const double> values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += fmt(values[i]);
    }
    out += "]";
    return out;
}

network::PartyKind party_kind_from(const std::string& s) {
    if (s == "policyholder") return network::PartyKind::policyholder;
    if (s == "garage") return network::PartyKind::garage;
    if (s == "broker") return network::PartyKind::broker;
    if (s == "expert") return network::PartyKind::expert;
    if (s == "person") return network::PartyKind::person;
    throw ConfigError("config: unknown party kind '" + s + "'");
}

} // namespace

model::ModelSpec default_fraud_spec(bool with_network_effects) {
    model::ModelSpec spec;
    spec.intercept = -5.0; // placeholder; calibration overrides it
    spec.terms = {
        {"ClaimAmount", std::nullopt, 0.20},
        {"ClaimAge", std::nullopt, -0.35},
        {"n1.size", std::nullopt, with_network_effects ? 2.00 : 0.0},
        {"n2.size", std::nullopt, with_network_effects ? -2.00 : 0.0},
        {"NrContractsPH", std::nullopt, -1.50},
        {"AgePH", std::nullopt, -2.00},
        {"n2.ratioFraud", std::nullopt, with_network_effects ? 3.00 : 0.0},
    };
    return spec;
}

EngineConfig EngineConfig::defaults() {
    EngineConfig cfg;
    cfg.fraud = default_fraud_spec(true);
    return cfg;
}

network::PartyPoolsConfig EngineConfig::resolved_pools() const {
    network::PartyPoolsConfig p;
    const int n_ph = portfolio.n_ph;
    p.n_experts = pools.n_experts >= 0 ? pools.n_experts : static_cast<int>(std::floor(0.01 * n_ph));
    p.n_brokers = pools.n_brokers >= 0 ? pools.n_brokers : static_cast<int>(std::floor(0.01 * n_ph));
    p.n_garages = pools.n_garages >= 0 ? pools.n_garages : static_cast<int>(std::floor(0.03 * n_ph));
    p.n_persons = pools.n_persons >= 0 ? pools.n_persons : static_cast<int>(std::floor(1.5 * n_ph));
    p.excluded = pools.excluded;
    p.expert_amount_threshold = pools.expert_amount_threshold;
    return p;
}

std::vector<std::string> EngineConfig::validate() const {
    std::vector<std::string> problems;
    portfolio.validate(problems);
    claims.validate(problems);
    imbalance.validate(problems);
    rules.validate(problems);
    if (labeling.init_fraction <= 0.0 || labeling.init_fraction > 1.0) {
        problems.emplace_back("labeling: init_fraction must lie in (0, 1]");
    }
    if (labeling.step_fraction <= 0.0 || labeling.step_fraction > 1.0) {
        problems.emplace_back("labeling: step_fraction must lie in (0, 1]");
    }
    if (!(labeling.birank.alpha >= 0.0 && labeling.birank.alpha <= 1.0)) {
        problems.emplace_back("labeling: birank alpha must lie in [0, 1]");
    }
    if (!(labeling.birank.tolerance > 0.0)) problems.emplace_back("labeling: birank tolerance must be positive");
    if (labeling.birank.max_iterations < 1) problems.emplace_back("labeling: birank max_iterations must be positive");
    const auto p = resolved_pools();
    if (!p.excluded.count(network::PartyKind::garage) && p.n_garages < 1) {
        problems.emplace_back("pools: garage pool must be nonempty");
    }
    if (!p.excluded.count(network::PartyKind::broker) && p.n_brokers < 1) {
        problems.emplace_back("pools: broker pool must be nonempty");
    }
    if (!p.excluded.count(network::PartyKind::expert) && p.n_experts < 1) {
        problems.emplace_back("pools: expert pool must be nonempty");
    }
    if (!p.excluded.count(network::PartyKind::person) && p.n_persons < 6) {
        problems.emplace_back("pools: person pool must cover the largest claim");
    }
    for (const auto& term : fraud.terms) {
        if (term.level) problems.emplace_back("fraud model: terms must be numeric features");
    }
    return problems;
}

std::string EngineConfig::serialize() const {
    std::ostringstream out;
    out << "[engine]\n";
    out << "master_seed = " << master_seed << "\n";
    out << "n_ph = " << portfolio.n_ph << "\n";
    out << "target_prevalence = " << fmt(imbalance.p_t) << "\n\n";

    out << "[portfolio]\n";
    out << "min_age = " << fmt(portfolio.min_age) << "\n";
    out << "max_age = " << fmt(portfolio.max_age) << "\n";
    out << "age_mean = " << fmt(portfolio.age_dist.a) << "\n";
    out << "age_sd = " << fmt(portfolio.age_dist.b) << "\n";
    out << "female_threshold = " << fmt(portfolio.female_threshold) << "\n";
    out << "male_threshold = " << fmt(portfolio.male_threshold) << "\n";
    out << "min_exposure = " << fmt(portfolio.min_exposure) << "\n";
    out << "max_exposure = " << fmt(portfolio.max_exposure) << "\n";
    out << "exposure_mean = " << fmt(portfolio.exposure_dist.a) << "\n";
    out << "exposure_sd = " << fmt(portfolio.exposure_dist.b) << "\n";
    out << "min_contracts = " << portfolio.min_contracts << "\n";
    out << "max_contracts = " << portfolio.max_contracts << "\n";
    out << "agecar_mean = " << fmt(portfolio.agecar_mean) << "\n";
    out << "agecar_sd = " << fmt(portfolio.agecar_sd) << "\n";
    out << "upsilon_male = " << fmt(portfolio.upsilon_male) << "\n";
    out << "upsilon_female = " << fmt(portfolio.upsilon_female) << "\n";
    out << "upsilon_nonbinary = " << fmt(portfolio.upsilon_nonbinary) << "\n";
    out << "depreciation_below = " << fmt(portfolio.depreciation_below) << "\n";
    out << "depreciation_above = " << fmt(portfolio.depreciation_above) << "\n";
    out << "depreciation_threshold = " << fmt(portfolio.depreciation_threshold) << "\n";
    out << "fuel_diesel_p = " << fmt(portfolio.fuel_diesel_p) << "\n";
    out << "bonus_malus_rate = " << fmt(portfolio.bonus_malus_rate) << "\n";
    out << "bonus_malus_cap = " << portfolio.bonus_malus_cap << "\n\n";

    out << "[dependencies]\n";
    out << "age_gender = " << copula_str(portfolio.age_gender) << "\n";
    out << "age_exposure = " << copula_str(portfolio.age_exposure) << "\n";
    out << "age_ncontracts = " << copula_str(portfolio.age_ncontracts) << "\n";
    out << "agecar_origvalue = " << copula_str(portfolio.agecar_origvalue) << "\n\n";

    out << "[coverage]\n";
    out << "beta_tpl = " << numbers_str(portfolio.coverage_beta[0]) << "\n";
    out << "beta_po = " << numbers_str(portfolio.coverage_beta[1]) << "\n";
    out << "beta_fo = " << numbers_str(portfolio.coverage_beta[2]) << "\n\n";

    out << "[pools]\n";
    out << "n_experts = " << pools.n_experts << "\n";
    out << "n_brokers = " << pools.n_brokers << "\n";
    out << "n_garages = " << pools.n_garages << "\n";
    out << "n_persons = " << pools.n_persons << "\n";
    out << "exclude = [";
    bool first = true;
    for (const auto kind : pools.excluded) {
        if (!first) out << ", ";
        out << quote(network::to_string(kind));
        first = false;
    }
    out << "]\n";
    out << "expert_amount_threshold = " << fmt(pools.expert_amount_threshold) << "\n\n";

    out << "[claims]\n";
    out << "gamma_shape = " << fmt(claims.gamma_shape) << "\n";
    out << "zeta = " << fmt(claims.zeta) << "\n";
    out << "amount_floor = " << fmt(claims.amount_floor) << "\n";
    out << "floor_replacement_lo = " << fmt(claims.floor_replacement_lo) << "\n";
    out << "floor_replacement_hi = " << fmt(claims.floor_replacement_hi) << "\n";
    out << "claim_age_rate = " << fmt(claims.claim_age_rate) << "\n";
    out << "police_p = " << fmt(claims.police_p) << "\n";
    out << "npersons_weights = " << numbers_str(claims.npersons_probs) << "\n\n";

    out << "[bins]\n";
    out << "age_ph = " << numbers_str(claims.age_ph_bin.cuts) << "\n";
    out << "age_car = " << numbers_str(claims.age_car_bin.cuts) << "\n";
    out << "bonus_malus = " << numbers_str(claims.bonus_malus_bin.cuts) << "\n\n";

    out << "[labeling]\n";
    out << "init_fraction = " << fmt(labeling.init_fraction) << "\n";
    out << "step_fraction = " << fmt(labeling.step_fraction) << "\n";
    out << "birank_alpha = " << fmt(labeling.birank.alpha) << "\n";
    out << "birank_tolerance = " << fmt(labeling.birank.tolerance) << "\n";
    out << "birank_max_iterations = " << labeling.birank.max_iterations << "\n\n";

    out << "[imbalance]\n";
    out << "search_lo = " << fmt(imbalance.search_lo) << "\n";
    out << "search_hi = " << fmt(imbalance.search_hi) << "\n";
    out << "tolerance = " << fmt(imbalance.tolerance) << "\n";
    out << "max_steps = " << imbalance.max_steps << "\n\n";

    out << "[rules]\n";
    out << "recency_years = " << fmt(rules.recency_years) << "\n";
    out << "single_claim_ratio = " << fmt(rules.single_claim_ratio) << "\n";
    out << "cumulative_ratio = " << fmt(rules.cumulative_ratio) << "\n";
    out << "expert_tpr = " << fmt(rules.expert_tpr) << "\n";
    out << "expert_tnr = " << fmt(rules.expert_tnr) << "\n";
    out << "value_basis = "
        << (rules.value_basis == investigate::BusinessRules::ValueBasis::current ? "\"current\""
                                                                                 : "\"original\"")
        << "\n\n";

    out << "[evaluation]\n";
    out << "features_label_view = "
        << (evaluation_features_expert_view ? "\"expert\"" : "\"ground_truth\"") << "\n\n";

    serialize_model(out, "frequency_model", claims.frequency);
    serialize_model(out, "severity_model", claims.severity);
    serialize_model(out, "fraud_model", fraud);
    return out.str();
}

std::string EngineConfig::content_hash() const {
    // the seed is not part of the configuration identity; replicates of one
    // configuration differ only in their seeds
    EngineConfig canonical = *this;
    canonical.master_seed = 0;
    const std::string text = canonical.serialize();
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

EngineConfig EngineConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_toml(text);
}

EngineConfig EngineConfig::from_toml(const std::string& text) {
    const Document doc = parse_document(text);
    EngineConfig cfg = defaults();

    auto number = [](const TomlValue& v, const std::string& where) { return v.as_number(where); };

    for (const auto& [section, entries] : doc) {
        if (section == "engine") {
            for (const auto& [key, value] : entries) {
                const std::string where = "engine." + key;
                if (key == "master_seed") {
                    cfg.master_seed = static_cast<std::uint64_t>(value.as_integer(where));
                } else if (key == "n_ph") {
                    cfg.portfolio.n_ph = static_cast<int>(value.as_integer(where));
                } else if (key == "target_prevalence") {
                    cfg.imbalance.p_t = number(value, where);
                } else {
                    throw ConfigError("config: unknown key '" + where + "'");
                }
            }
        } else if (section == "portfolio") {
            for (const auto& [key, value] : entries) {
                const std::string where = "portfolio." + key;
                auto& p = cfg.portfolio;
                if (key == "min_age") p.min_age = number(value, where);
                else if (key == "max_age") p.max_age = number(value, where);
                else if (key == "age_mean") p.age_dist.a = number(value, where);
                else if (key == "age_sd") p.age_dist.b = number(value, where);
                else if (key == "female_threshold") p.female_threshold = number(value, where);
                else if (key == "male_threshold") p.male_threshold = number(value, where);
                else if (key == "min_exposure") p.min_exposure = number(value, where);
                else if (key == "max_exposure") p.max_exposure = number(value, where);
                else if (key == "exposure_mean") p.exposure_dist.a = number(value, where);
                else if (key == "exposure_sd") p.exposure_dist.b = number(value, where);
                else if (key == "min_contracts") p.min_contracts = static_cast<int>(value.as_integer(where));
                else if (key == "max_contracts") p.max_contracts = static_cast<int>(value.as_integer(where));
                else if (key == "agecar_mean") p.agecar_mean = number(value, where);
                else if (key == "agecar_sd") p.agecar_sd = number(value, where);
                else if (key == "upsilon_male") p.upsilon_male = number(value, where);
                else if (key == "upsilon_female") p.upsilon_female = number(value, where);
                else if (key == "upsilon_nonbinary") p.upsilon_nonbinary = number(value, where);
                else if (key == "depreciation_below") p.depreciation_below = number(value, where);
                else if (key == "depreciation_above") p.depreciation_above = number(value, where);
                else if (key == "depreciation_threshold") p.depreciation_threshold = number(value, where);
                else if (key == "fuel_diesel_p") p.fuel_diesel_p = number(value, where);
                else if (key == "bonus_malus_rate") p.bonus_malus_rate = number(value, where);
                else if (key == "bonus_malus_cap") p.bonus_malus_cap = static_cast<int>(value.as_integer(where));
                else throw ConfigError("config: unknown key '" + where + "'");
            }
        } else if (section == "dependencies") {
            for (const auto& [key, value] : entries) {
                const std::string where = "dependencies." + key;
                if (key == "age_gender") cfg.portfolio.age_gender = copula_from(value, where);
                else if (key == "age_exposure") cfg.portfolio.age_exposure = copula_from(value, where);
                else if (key == "age_ncontracts") cfg.portfolio.age_ncontracts = copula_from(value, where);
                else if (key == "agecar_origvalue") cfg.portfolio.agecar_origvalue = copula_from(value, where);
                else throw ConfigError("config: unknown key '" + where + "'");
            }
        } else if (section == "coverage") {
            for (const auto& [key, value] : entries) {
                const std::string where = "coverage." + key;
                const std::vector<double> beta = numbers_from(value, where);
                if (beta.size() != 3) throw ConfigError("config: coverage beta needs 3 entries at " + where);
                std::size_t row;
                if (key == "beta_tpl") row = 0;
                else if (key == "beta_po") row = 1;
                else if (key == "beta_fo") row = 2;
                else throw ConfigError("config: unknown key '" + where + "'");
                std::copy(beta.begin(), beta.end(), cfg.portfolio.coverage_beta[row].begin());
            }
        } else if (section == "pools") {
            for (const auto& [key, value] : entries) {
                const std::string where = "pools." + key;
                if (key == "n_experts") cfg.pools.n_experts = static_cast<int>(value.as_integer(where));
                else if (key == "n_brokers") cfg.pools.n_brokers = static_cast<int>(value.as_integer(where));
                else if (key == "n_garages") cfg.pools.n_garages = static_cast<int>(value.as_integer(where));
                else if (key == "n_persons") cfg.pools.n_persons = static_cast<int>(value.as_integer(where));
                else if (key == "expert_amount_threshold") cfg.pools.expert_amount_threshold = number(value, where);
                else if (key == "exclude") {
                    cfg.pools.excluded.clear();
                    for (const TomlValue& item : value.as_array(where)) {
                        cfg.pools.excluded.insert(party_kind_from(item.as_string(where)));
                    }
                } else {
                    throw ConfigError("config: unknown key '" + where + "'");
                }
            }
        } else if (section == "claims") {
            for (const auto& [key, value] : entries) {
                const std::string where = "claims." + key;
                auto& c = cfg.claims;
                if (key == "gamma_shape") c.gamma_shape = number(value, where);
                else if (key == "zeta") c.zeta = number(value, where);
                else if (key == "amount_floor") c.amount_floor = number(value, where);
                else if (key == "floor_replacement_lo") c.floor_replacement_lo = number(value, where);
                else if (key == "floor_replacement_hi") c.floor_replacement_hi = number(value, where);
                else if (key == "claim_age_rate") c.claim_age_rate = number(value, where);
                else if (key == "police_p") c.police_p = number(value, where);
                else if (key == "npersons_weights") c.npersons_probs = numbers_from(value, where);
                else throw ConfigError("config: unknown key '" + where + "'");
            }
        } else if (section == "bins") {
            for (const auto& [key, value] : entries) {
                const std::string where = "bins." + key;
                if (key == "age_ph") cfg.claims.age_ph_bin.cuts = numbers_from(value, where);
                else if (key == "age_car") cfg.claims.age_car_bin.cuts = numbers_from(value, where);
                else if (key == "bonus_malus") cfg.claims.bonus_malus_bin.cuts = numbers_from(value, where);
                else throw ConfigError("config: unknown key '" + where + "'");
            }
        } else if (section == "labeling") {
            for (const auto& [key, value] : entries) {
                const std::string where = "labeling." + key;
                if (key == "init_fraction") cfg.labeling.init_fraction = number(value, where);
                else if (key == "step_fraction") cfg.labeling.step_fraction = number(value, where);
                else if (key == "birank_alpha") cfg.labeling.birank.alpha = number(value, where);
                else if (key == "birank_tolerance") cfg.labeling.birank.tolerance = number(value, where);
                else if (key == "birank_max_iterations") cfg.labeling.birank.max_iterations = static_cast<int>(value.as_integer(where));
                else throw ConfigError("config: unknown key '" + where + "'");
            }
        } else if (section == "imbalance") {
            for (const auto& [key, value] : entries) {
                const std::string where = "imbalance." + key;
                if (key == "search_lo") cfg.imbalance.search_lo = number(value, where);
                else if (key == "search_hi") cfg.imbalance.search_hi = number(value, where);
                else if (key == "tolerance") cfg.imbalance.tolerance = number(value, where);
                else if (key == "max_steps") cfg.imbalance.max_steps = static_cast<int>(value.as_integer(where));
                else throw ConfigError("config: unknown key '" + where + "'");
            }
        } else if (section == "rules") {
            for (const auto& [key, value] : entries) {
                const std::string where = "rules." + key;
                if (key == "recency_years") cfg.rules.recency_years = number(value, where);
                else if (key == "single_claim_ratio") cfg.rules.single_claim_ratio = number(value, where);
                else if (key == "cumulative_ratio") cfg.rules.cumulative_ratio = number(value, where);
                else if (key == "expert_tpr") cfg.rules.expert_tpr = number(value, where);
                else if (key == "expert_tnr") cfg.rules.expert_tnr = number(value, where);
                else if (key == "value_basis") {
                    const std::string basis = value.as_string(where);
                    if (basis == "original") cfg.rules.value_basis = investigate::BusinessRules::ValueBasis::original;
                    else if (basis == "current") cfg.rules.value_basis = investigate::BusinessRules::ValueBasis::current;
                    else throw ConfigError("config: value_basis must be original or current");
                } else throw ConfigError("config: unknown key '" + where + "'");
            }
        } else if (section == "evaluation") {
            for (const auto& [key, value] : entries) {
                const std::string where = "evaluation." + key;
                if (key == "features_label_view") {
                    const std::string view = value.as_string(where);
                    if (view == "expert") cfg.evaluation_features_expert_view = true;
                    else if (view == "ground_truth") cfg.evaluation_features_expert_view = false;
                    else throw ConfigError("config: features_label_view must be ground_truth or expert");
                } else {
                    throw ConfigError("config: unknown key '" + where + "'");
                }
            }
        } else if (section == "frequency_model") {
            cfg.claims.frequency = model_from(entries, section);
        } else if (section == "severity_model") {
            cfg.claims.severity = model_from(entries, section);
        } else if (section == "fraud_model") {
            cfg.fraud = model_from(entries, section);
        } else {
            throw ConfigError("config: unknown section '[" + section + "]'");
        }
    }
    return cfg;
}

int engine_threads() {
    if (const char* env = std::getenv("ENGINE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

} // namespace engine::config
