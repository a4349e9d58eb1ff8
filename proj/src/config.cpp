#include "nhl/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace nhl {

using nlohmann::json;

namespace {

// -------------------------------------------------------------------------------------------------
// TOML subset reader

class TomlReader {
public:
    explicit TomlReader(const std::string& text) : s_(text) {}

    json document()
    {
        json root = json::object();
        json* table = &root;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                ++pos_;
                if (peek() == '[') fail("arrays of tables are not supported");
                auto path = key_path(']');
                expect(']');
                table = &root;
                for (const auto& k : path) {
                    json& next = (*table)[k];
                    if (next.is_null()) next = json::object();
                    if (!next.is_object()) fail("'" + k + "' is not a table");
                    table = &next;
                }
                end_of_line();
                continue;
            }
            auto path = key_path('=');
            expect('=');
            skip_space();
            json v = value();
            assign(*table, path, std::move(v));
            end_of_line();
        }
        return root;
    }

    json single_value()
    {
        skip_space();
        json v = value();
        skip_space();
        if (!eof()) fail("trailing characters after value");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        int line = 1;
        for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i)
            if (s_[i] == '\n') ++line;
        throw ParseError(fmt::format("line {}: {}", line, what));
    }

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[pos_]; }

    void expect(char c)
    {
        skip_space();
        if (peek() != c) fail(fmt::format("expected '{}'", c));
        ++pos_;
    }

    void skip_space()
    {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_comment()
    {
        if (peek() == '#')
            while (!eof() && peek() != '\n') ++pos_;
    }

    void skip_blank_lines()
    {
        while (!eof()) {
            skip_space();
            skip_comment();
            if (peek() == '\n' || peek() == '\r')
                ++pos_;
            else
                break;
        }
    }

    // whitespace, comments and newlines inside arrays
    void skip_layout()
    {
        while (!eof()) {
            skip_space();
            skip_comment();
            if (peek() == '\n' || peek() == '\r')
                ++pos_;
            else
                break;
        }
    }

    void end_of_line()
    {
        skip_space();
        skip_comment();
        if (eof()) return;
        if (peek() == '\r') ++pos_;
        if (peek() != '\n') fail("expected end of line");
        ++pos_;
    }

    std::vector<std::string> key_path(char terminator)
    {
        std::vector<std::string> path;
        while (true) {
            skip_space();
            std::string k;
            if (peek() == '"') {
                k = basic_string();
            } else if (peek() == '\'') {
                k = literal_string();
            } else {
                while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
                    k += s_[pos_++];
                if (k.empty()) fail("expected a key");
            }
            path.push_back(k);
            skip_space();
            if (peek() == '.') {
                ++pos_;
                continue;
            }
            if (peek() != terminator) fail(fmt::format("expected '{}' after key", terminator));
            return path;
        }
    }

    void assign(json& table, const std::vector<std::string>& path, json v)
    {
        json* t = &table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            json& next = (*t)[path[i]];
            if (next.is_null()) next = json::object();
            if (!next.is_object()) fail("'" + path[i] + "' is not a table");
            t = &next;
        }
        if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
        (*t)[path.back()] = std::move(v);
    }

    std::string basic_string()
    {
        ++pos_;
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = s_[pos_++];
            if (c == '"') return out;
            if (c != '\\') {
                out += c;
                continue;
            }
            if (eof()) fail("unterminated escape");
            char e = s_[pos_++];
            switch (e) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            default: fail(fmt::format("unsupported escape '\\{}'", e));
            }
        }
    }

    std::string literal_string()
    {
        ++pos_;
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = s_[pos_++];
            if (c == '\'') return out;
            out += c;
        }
    }

    json value()
    {
        char c = peek();
        if (c == '"') return basic_string();
        if (c == '\'') return literal_string();
        if (c == '[') return array();
        if (c == '{') return inline_table();
        if (s_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return true;
        }
        if (s_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return false;
        }
        return number();
    }

    json array()
    {
        ++pos_;
        json arr = json::array();
        while (true) {
            skip_layout();
            if (peek() == ']') {
                ++pos_;
                return arr;
            }
            arr.push_back(value());
            skip_layout();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            if (peek() != ']') fail("expected ',' or ']' in array");
        }
    }

    json inline_table()
    {
        ++pos_;
        json t = json::object();
        skip_space();
        if (peek() == '}') {
            ++pos_;
            return t;
        }
        while (true) {
            auto path = key_path('=');
            expect('=');
            skip_space();
            assign(t, path, value());
            skip_space();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            if (peek() == '}') {
                ++pos_;
                return t;
            }
            fail("expected ',' or '}' in inline table");
        }
    }

    json number()
    {
        std::size_t start = pos_;
        std::string tok;
        while (!eof()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' || c == '_') {
                if (c != '_') tok += c;
                ++pos_;
            } else {
                break;
            }
        }
        if (tok.empty()) fail("expected a value");
        std::string body = (tok[0] == '+' || tok[0] == '-') ? tok.substr(1) : tok;
        double sign = tok[0] == '-' ? -1.0 : 1.0;
        if (body == "inf") return sign * std::numeric_limits<double>::infinity();
        if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
        bool is_float = tok.find_first_of(".eE") != std::string::npos;
        try {
            std::size_t used = 0;
            if (is_float) {
                double v = std::stod(tok, &used);
                if (used == tok.size()) return v;
            } else {
                long long v = std::stoll(tok, &used, 10);
                if (used == tok.size()) return v;
            }
        } catch (const std::exception&) {
        }
        pos_ = start;
        fail("invalid value '" + tok + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

// -------------------------------------------------------------------------------------------------
// Typed access

const std::set<std::string>& known_keys()
{
    static const std::set<std::string> keys{
        "grid.dim", "grid.n", "grid.box_halfwidth",
        "kernel.type", "kernel.alpha", "kernel.upsilon", "kernel.rate",
        "coeff.structure", "coeff.gamma", "coeff.q_values", "coeff.seed", "coeff.effective_method",
        "coeff.mc_samples", "coeff.stderr_cap", "coeff.lambda.type", "coeff.lambda.params", "coeff.mu.type",
        "coeff.mu.params", "coeff.symmetric.type", "coeff.symmetric.params",
        "problem.m", "problem.f.type", "problem.f.center", "problem.f.width", "problem.f.amplitude",
        "problem.f.lo", "problem.f.hi",
        "sweep.epsilons", "sweep.seeds", "sweep.mode", "sweep.output",
        "nonlinear.p", "nonlinear.c", "nonlinear.tol", "nonlinear.max_iter",
        "solver.tol", "solver.max_iter", "solver.reproducible", "solver.threads",
        "quad.tolerance", "quad.max_depth", "quad.r_far", "quad.coeff_subsamples"};
    return keys;
}

void check_known(const json& node, const std::string& prefix)
{
    for (auto it = node.begin(); it != node.end(); ++it) {
        std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object()) {
            bool is_table = false;
            for (const auto& k : known_keys())
                if (k.rfind(key + ".", 0) == 0) is_table = true;
            if (!is_table) throw ConfigError(key, "unknown key");
            check_known(*it, key);
        } else if (!known_keys().count(key)) {
            throw ConfigError(key, "unknown key");
        }
    }
}

const json* find(const json& doc, const std::string& dotted)
{
    const json* node = &doc;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = dotted.find('.', start);
        std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(part)) return nullptr;
        node = &(*node)[part];
        if (dot == std::string::npos) return node;
        start = dot + 1;
    }
}

double as_double(const json& v, const std::string& key)
{
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    return v.get<double>();
}

long long as_int(const json& v, const std::string& key)
{
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    throw ConfigError(key, "expected an integer");
}

template <class T, class Conv>
void read(const json& doc, const std::string& key, T& out, Conv conv)
{
    if (const json* v = find(doc, key)) out = conv(*v, key);
}

void read_double(const json& doc, const std::string& key, double& out)
{
    read(doc, key, out, as_double);
}

void read_int(const json& doc, const std::string& key, int& out)
{
    read(doc, key, out, [](const json& v, const std::string& k) {
        long long x = as_int(v, k);
        if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
            throw ConfigError(k, "integer out of range");
        return static_cast<int>(x);
    });
}

void read_string(const json& doc, const std::string& key, std::string& out)
{
    read(doc, key, out, [](const json& v, const std::string& k) {
        if (!v.is_string()) throw ConfigError(k, "expected a string");
        return v.get<std::string>();
    });
}

void read_bool(const json& doc, const std::string& key, bool& out)
{
    read(doc, key, out, [](const json& v, const std::string& k) {
        if (!v.is_boolean()) throw ConfigError(k, "expected true or false");
        return v.get<bool>();
    });
}

// A scalar is accepted where a list is expected.
void read_doubles(const json& doc, const std::string& key, std::vector<double>& out)
{
    read(doc, key, out, [](const json& v, const std::string& k) {
        std::vector<double> r;
        if (v.is_array())
            for (const auto& x : v) r.push_back(as_double(x, k));
        else
            r.push_back(as_double(v, k));
        return r;
    });
}

void read_cell(const json& doc, const std::string& key, CellSpec& out)
{
    if (const json* v = find(doc, key)) {
        if (!v->is_object()) throw ConfigError(key, "expected an inline table {type, params}");
        read_string(doc, key + ".type", out.type);
        read_doubles(doc, key + ".params", out.params);
    }
}

std::string format_double(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    std::string s = fmt::format("{:.17g}", v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string toml_value(const json& v)
{
    if (v.is_string()) {
        std::string out = "\"";
        for (char c : v.get<std::string>()) {
            if (c == '"' || c == '\\') out += '\\';
            if (c == '\n') {
                out += "\\n";
                continue;
            }
            out += c;
        }
        return out + "\"";
    }
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return v.dump();
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_array()) {
        std::string out = "[";
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + toml_value(v[i]);
        return out + "]";
    }
    if (v.is_object()) {
        std::string out = "{";
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            out += (first ? " " : ", ") + it.key() + " = " + toml_value(*it);
            first = false;
        }
        return out + " }";
    }
    throw Error("cannot render value as TOML");
}

}  // namespace

// -------------------------------------------------------------------------------------------------

json parse_toml(const std::string& text)
{
    TomlReader r(text);
    return r.document();
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides)
{
    for (const std::string& o : overrides) {
        auto eq = o.find('=');
        if (eq == std::string::npos) throw ParseError("override '" + o + "' is not of the form key=value");
        std::string key = o.substr(0, eq), text = o.substr(eq + 1);
        auto trim = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
        };
        trim(key);
        trim(text);
        if (key.empty()) throw ParseError("override '" + o + "' has an empty key");
        json v;
        try {
            TomlReader r(text);
            v = r.single_value();
        } catch (const ParseError&) {
            v = text;
        }
        json* node = &doc;
        std::size_t start = 0;
        while (true) {
            std::size_t dot = key.find('.', start);
            std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (dot == std::string::npos) {
                (*node)[part] = v;
                break;
            }
            json& next = (*node)[part];
            if (next.is_null()) next = json::object();
            if (!next.is_object()) throw ConfigError(key, "override descends into a non-table value");
            node = &next;
            start = dot + 1;
        }
    }
}

ExperimentConfig config_from_json(const json& doc, bool validate)
{
    if (!doc.is_object()) throw ParseError("configuration must be a table");
    check_known(doc, "");
    ExperimentConfig cfg;

    read_int(doc, "grid.dim", cfg.dim);
    read_int(doc, "grid.n", cfg.n);
    read_double(doc, "grid.box_halfwidth", cfg.box_halfwidth);

    read_string(doc, "kernel.type", cfg.kernel.type);
    read_double(doc, "kernel.alpha", cfg.kernel.alpha);
    read_double(doc, "kernel.upsilon", cfg.kernel.upsilon);
    read_double(doc, "kernel.rate", cfg.kernel.rate);

    std::string structure = to_string(cfg.coeff.structure);
    read_string(doc, "coeff.structure", structure);
    cfg.coeff.structure = structure_from_string(structure);
    read_double(doc, "coeff.gamma", cfg.coeff.gamma);
    read(doc, "coeff.q_values", cfg.coeff.q_values, [](const json& v, const std::string& k) {
        std::vector<int> r;
        if (v.is_array())
            for (const auto& x : v) r.push_back(static_cast<int>(as_int(x, k)));
        else
            r.push_back(static_cast<int>(as_int(v, k)));
        return r;
    });
    read(doc, "coeff.seed", cfg.coeff.seed, [](const json& v, const std::string& k) {
        long long s = as_int(v, k);
        if (s < 0) throw ConfigError(k, "seed must be nonnegative");
        return static_cast<std::uint64_t>(s);
    });
    read_string(doc, "coeff.effective_method", cfg.coeff.effective_method);
    read(doc, "coeff.mc_samples", cfg.coeff.mc_samples, [](const json& v, const std::string& k) {
        long long s = as_int(v, k);
        if (s < 0) throw ConfigError(k, "sample count must be nonnegative");
        return static_cast<std::size_t>(s);
    });
    read_double(doc, "coeff.stderr_cap", cfg.coeff.stderr_cap);
    read_cell(doc, "coeff.lambda", cfg.coeff.lambda);
    read_cell(doc, "coeff.mu", cfg.coeff.mu);
    read_cell(doc, "coeff.symmetric", cfg.coeff.symmetric);

    read_double(doc, "problem.m", cfg.m);
    if (const json* f = find(doc, "problem.f"); f && !f->is_object())
        throw ConfigError("problem.f", "expected an inline table");
    read_string(doc, "problem.f.type", cfg.f.type);
    read_doubles(doc, "problem.f.center", cfg.f.center);
    read_double(doc, "problem.f.width", cfg.f.width);
    read_double(doc, "problem.f.amplitude", cfg.f.amplitude);
    read_doubles(doc, "problem.f.lo", cfg.f.lo);
    read_doubles(doc, "problem.f.hi", cfg.f.hi);
    if (!find(doc, "problem.f.center")) cfg.f.center.assign(static_cast<std::size_t>(std::max(cfg.dim, 1)), 0.0);
    if (!find(doc, "problem.f.lo")) cfg.f.lo.assign(static_cast<std::size_t>(std::max(cfg.dim, 1)), 0.0);
    if (!find(doc, "problem.f.hi")) cfg.f.hi.assign(static_cast<std::size_t>(std::max(cfg.dim, 1)), 1.0);

    read_doubles(doc, "sweep.epsilons", cfg.epsilons);
    read(doc, "sweep.seeds", cfg.seeds, [](const json& v, const std::string& k) {
        std::vector<std::uint64_t> r;
        auto one = [&](const json& x) {
            long long s = as_int(x, k);
            if (s < 0) throw ConfigError(k, "seeds must be nonnegative");
            r.push_back(static_cast<std::uint64_t>(s));
        };
        if (v.is_array())
            for (const auto& x : v) one(x);
        else
            one(v);
        return r;
    });
    std::string mode = "linear";
    read_string(doc, "sweep.mode", mode);
    if (mode == "linear")
        cfg.mode = SweepMode::Linear;
    else if (mode == "nonlinear")
        cfg.mode = SweepMode::Nonlinear;
    else
        throw ConfigError("sweep.mode", "expected 'linear' or 'nonlinear'");
    read_string(doc, "sweep.output", cfg.output);

    read_double(doc, "nonlinear.p", cfg.phi.p);
    cfg.phi.c = cfg.phi.p > 0.0 ? 1.0 / cfg.phi.p : 0.5;
    read_double(doc, "nonlinear.c", cfg.phi.c);
    read_double(doc, "nonlinear.tol", cfg.nonlinear_tol);
    read_int(doc, "nonlinear.max_iter", cfg.nonlinear_max_iter);

    read_double(doc, "solver.tol", cfg.solver_tol);
    read_int(doc, "solver.max_iter", cfg.solver_max_iter);
    read_bool(doc, "solver.reproducible", cfg.reproducible);
    read_int(doc, "solver.threads", cfg.threads);

    read_double(doc, "quad.tolerance", cfg.tail.tolerance);
    int depth = static_cast<int>(cfg.tail.max_depth);
    read_int(doc, "quad.max_depth", depth);
    if (depth < 1) throw ConfigError("quad.max_depth", "depth cap must be at least 1");
    cfg.tail.max_depth = static_cast<unsigned>(depth);
    read_double(doc, "quad.r_far", cfg.tail.r_far);
    read_int(doc, "quad.coeff_subsamples", cfg.coeff_subsamples);

    if (validate) cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides)
{
    json doc = parse_toml(text);
    apply_overrides(doc, overrides);
    return config_from_json(doc);
}

ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), overrides);
}

json config_to_json(const ExperimentConfig& cfg)
{
    json d;
    d["grid"] = {{"dim", cfg.dim}, {"n", cfg.n}, {"box_halfwidth", cfg.box_halfwidth}};
    d["kernel"] = {{"type", cfg.kernel.type},
                   {"alpha", cfg.kernel.alpha},
                   {"upsilon", cfg.kernel.upsilon},
                   {"rate", cfg.kernel.rate}};
    auto cell = [](const CellSpec& c) { return json{{"type", c.type}, {"params", c.params}}; };
    d["coeff"] = {{"structure", to_string(cfg.coeff.structure)},
                  {"gamma", cfg.coeff.gamma},
                  {"q_values", cfg.coeff.q_values},
                  {"seed", cfg.coeff.seed},
                  {"effective_method", cfg.coeff.effective_method},
                  {"mc_samples", cfg.coeff.mc_samples},
                  {"stderr_cap", cfg.coeff.stderr_cap},
                  {"lambda", cell(cfg.coeff.lambda)},
                  {"mu", cell(cfg.coeff.mu)},
                  {"symmetric", cell(cfg.coeff.symmetric)}};
    d["problem"] = {{"m", cfg.m},
                    {"f",
                     {{"type", cfg.f.type},
                      {"center", cfg.f.center},
                      {"width", cfg.f.width},
                      {"amplitude", cfg.f.amplitude},
                      {"lo", cfg.f.lo},
                      {"hi", cfg.f.hi}}}};
    d["sweep"] = {{"epsilons", cfg.epsilons},
                  {"seeds", cfg.seeds},
                  {"mode", cfg.mode == SweepMode::Linear ? "linear" : "nonlinear"},
                  {"output", cfg.output}};
    d["nonlinear"] = {{"p", cfg.phi.p}, {"c", cfg.phi.c}, {"tol", cfg.nonlinear_tol}, {"max_iter", cfg.nonlinear_max_iter}};
    d["solver"] = {{"tol", cfg.solver_tol},
                   {"max_iter", cfg.solver_max_iter},
                   {"reproducible", cfg.reproducible},
                   {"threads", cfg.threads}};
    d["quad"] = {{"tolerance", cfg.tail.tolerance},
                 {"max_depth", cfg.tail.max_depth},
                 {"r_far", cfg.tail.r_far},
                 {"coeff_subsamples", cfg.coeff_subsamples}};
    return d;
}

std::string config_to_toml(const ExperimentConfig& cfg)
{
    json d = config_to_json(cfg);
    std::string out;
    for (const char* table : {"grid", "kernel", "coeff", "problem", "sweep", "nonlinear", "solver", "quad"}) {
        out += fmt::format("[{}]\n", table);
        for (auto it = d[table].begin(); it != d[table].end(); ++it)
            out += fmt::format("{} = {}\n", it.key(), toml_value(*it));
        out += "\n";
    }
    return out;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b)
{
    return config_to_json(a) == config_to_json(b);
}

}  // namespace nhl
