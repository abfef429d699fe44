#include "robinlap/config.hpp"

#include "robinlap/expression.hpp"
#include "robinlap/multiplier.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace robinlap {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::config_invalid, msg); }

class TomlParser {
public:
    explicit TomlParser(std::string_view text) : s_(text) {}

    json document()
    {
        json root = json::object();
        json* table = &root;
        for (;;) {
            skip_blank_lines();
            if (eof())
                break;
            if (peek() == '[') {
                ++pos_;
                if (!eof() && peek() == '[')
                    fail("arrays of tables are not supported");
                skip_ws();
                const auto path = key_path();
                skip_ws();
                expect(']');
                end_of_line();
                table = &root;
                for (const auto& k : path) {
                    json& next = (*table)[k];
                    if (next.is_null())
                        next = json::object();
                    else if (!next.is_object())
                        fail("'" + k + "' is not a table");
                    table = &next;
                }
                if (!defined_tables_.insert(join(path)).second)
                    fail("table [" + join(path) + "] defined twice");
                continue;
            }
            key_value(*table);
            end_of_line();
        }
        return root;
    }

    json single_value()
    {
        skip_ws();
        json v = value();
        skip_ws();
        if (!eof())
            fail("trailing characters after value");
        return v;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    std::set<std::string> defined_tables_;

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }

    int line() const
    {
        int l = 1;
        for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i)
            l += s_[i] == '\n';
        return l;
    }

    [[noreturn]] void fail(const std::string& msg) const
    {
        invalid("line " + std::to_string(line()) + ": " + msg);
    }

    static std::string join(const std::vector<std::string>& path)
    {
        std::string out;
        for (const auto& k : path)
            out += (out.empty() ? "" : ".") + k;
        return out;
    }

    void expect(char c)
    {
        if (eof() || peek() != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_ws()
    {
        while (!eof() && (peek() == ' ' || peek() == '\t'))
            ++pos_;
    }

    void skip_comment()
    {
        if (!eof() && peek() == '#')
            while (!eof() && peek() != '\n')
                ++pos_;
    }

    void skip_blank_lines()
    {
        for (;;) {
            skip_ws();
            skip_comment();
            if (!eof() && (peek() == '\n' || peek() == '\r'))
                ++pos_;
            else
                return;
        }
    }

    // whitespace, comments and newlines inside arrays
    void skip_all()
    {
        for (;;) {
            skip_ws();
            skip_comment();
            if (!eof() && (peek() == '\n' || peek() == '\r'))
                ++pos_;
            else
                return;
        }
    }

    void end_of_line()
    {
        skip_ws();
        skip_comment();
        if (eof())
            return;
        if (peek() == '\r')
            ++pos_;
        if (eof() || peek() != '\n')
            fail("expected end of line");
        ++pos_;
    }

    std::string key()
    {
        if (eof())
            fail("expected a key");
        if (peek() == '"')
            return basic_string();
        if (peek() == '\'')
            return literal_string();
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
            ++pos_;
        if (pos_ == start)
            fail("expected a key");
        return std::string(s_.substr(start, pos_ - start));
    }

    std::vector<std::string> key_path()
    {
        std::vector<std::string> path{key()};
        for (;;) {
            skip_ws();
            if (eof() || peek() != '.')
                return path;
            ++pos_;
            skip_ws();
            path.push_back(key());
        }
    }

    void key_value(json& table)
    {
        const auto path = key_path();
        skip_ws();
        expect('=');
        skip_ws();
        json* target = &table;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            json& next = (*target)[path[i]];
            if (next.is_null())
                next = json::object();
            else if (!next.is_object())
                fail("'" + path[i] + "' is not a table");
            target = &next;
        }
        if (target->contains(path.back()))
            fail("key '" + join(path) + "' defined twice");
        (*target)[path.back()] = value();
    }

    json value()
    {
        if (eof())
            fail("expected a value");
        const char c = peek();
        if (c == '"')
            return basic_string();
        if (c == '\'')
            return literal_string();
        if (c == '[')
            return array();
        if (c == '{')
            return inline_table();
        if (s_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return true;
        }
        if (s_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return false;
        }
        return number();
    }

    std::string basic_string()
    {
        expect('"');
        std::string out;
        for (;;) {
            if (eof() || peek() == '\n')
                fail("unterminated string");
            const char c = s_[pos_++];
            if (c == '"')
                return out;
            if (c != '\\') {
                out += c;
                continue;
            }
            if (eof())
                fail("unterminated escape");
            const char e = s_[pos_++];
            switch (e) {
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            case 'r': out += '\r'; break;
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            default: fail(std::string("unsupported escape \\") + e);
            }
        }
    }

    std::string literal_string()
    {
        expect('\'');
        const std::size_t start = pos_;
        while (!eof() && peek() != '\'' && peek() != '\n')
            ++pos_;
        if (eof() || peek() != '\'')
            fail("unterminated literal string");
        std::string out(s_.substr(start, pos_ - start));
        ++pos_;
        return out;
    }

    json array()
    {
        expect('[');
        json out = json::array();
        for (;;) {
            skip_all();
            if (eof())
                fail("unterminated array");
            if (peek() == ']') {
                ++pos_;
                return out;
            }
            out.push_back(value());
            skip_all();
            if (!eof() && peek() == ',') {
                ++pos_;
                continue;
            }
            skip_all();
            expect(']');
            return out;
        }
    }

    json inline_table()
    {
        expect('{');
        json out = json::object();
        skip_ws();
        if (!eof() && peek() == '}') {
            ++pos_;
            return out;
        }
        for (;;) {
            skip_ws();
            key_value(out);
            skip_ws();
            if (!eof() && peek() == ',') {
                ++pos_;
                continue;
            }
            expect('}');
            return out;
        }
    }

    json number()
    {
        const std::size_t start = pos_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                          peek() == '.' || peek() == '_'))
            ++pos_;
        std::string tok;
        for (char c : s_.substr(start, pos_ - start))
            if (c != '_')
                tok += c;
        if (tok.empty())
            fail("expected a value");
        std::string body = tok;
        const bool neg = !body.empty() && body[0] == '-';
        if (!body.empty() && (body[0] == '+' || body[0] == '-'))
            body.erase(0, 1);
        if (body == "inf")
            return neg ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        if (body == "nan")
            return std::numeric_limits<double>::quiet_NaN();
        const bool is_float = tok.find_first_of(".eE") != std::string::npos;
        const char* first = tok.data() + (tok[0] == '+' ? 1 : 0);
        const char* last = tok.data() + tok.size();
        if (!is_float) {
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc() || ptr != last)
                fail("malformed value '" + tok + "'");
            return v;
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            fail("malformed value '" + tok + "'");
        return v;
    }
};

// ---------------------------------------------------------------------------
// validation helpers

const json* find(const json& j, std::initializer_list<const char*> path)
{
    const json* cur = &j;
    for (const char* k : path) {
        if (!cur->is_object() || !cur->contains(k))
            return nullptr;
        cur = &(*cur)[k];
    }
    return cur;
}

std::string dotted(std::initializer_list<const char*> path)
{
    std::string out;
    for (const char* k : path)
        out += (out.empty() ? "" : ".") + std::string(k);
    return out;
}

template <class T>
void read(const json& j, std::initializer_list<const char*> path, T& out)
{
    const json* v = find(j, path);
    if (!v)
        return;
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!v->is_number())
                invalid(dotted(path) + " must be a number");
            out = v->get<double>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v->is_number_integer())
                invalid(dotted(path) + " must be an integer");
            const auto i = v->get<std::int64_t>();
            if (i < static_cast<std::int64_t>(std::numeric_limits<T>::min()) ||
                (i > 0 && static_cast<std::uint64_t>(i) > static_cast<std::uint64_t>(std::numeric_limits<T>::max())))
                invalid(dotted(path) + " is out of range");
            out = static_cast<T>(i);
        } else if constexpr (std::is_same_v<T, std::string>) {
            // `--coefficient.expr 0` arrives as a number
            if (v->is_number())
                out = v->dump();
            else if (v->is_string())
                out = v->get<std::string>();
            else
                invalid(dotted(path) + " must be a string");
        } else {
            if (!v->is_array())
                invalid(dotted(path) + " must be an array of integers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number_integer())
                    invalid(dotted(path) + " must be an array of integers");
                out.push_back(e.get<int>());
            }
        }
    } catch (const json::exception& e) {
        invalid(dotted(path) + ": " + e.what());
    }
}

void require(bool ok, const std::string& msg)
{
    if (!ok)
        invalid(msg);
}

cplx read_lambda(const json& v)
{
    if (v.is_number())
        return v.get<double>();
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    invalid("solver.lambda entries must be numbers or [re, im] pairs");
}

} // namespace

nlohmann::json parse_toml(std::string_view text) { return TomlParser(text).document(); }

nlohmann::json load_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io_error, "cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (path.extension() == ".json") {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            invalid(path.string() + ": " + e.what());
        }
    }
    return parse_toml(text);
}

void apply_override(nlohmann::json& config, std::string_view dotted_key, std::string_view value)
{
    if (dotted_key.empty())
        invalid("empty override key");
    nlohmann::json parsed;
    try {
        parsed = TomlParser(value).single_value();
    } catch (const Error&) {
        parsed = std::string(value);
    }
    nlohmann::json* cur = &config;
    std::size_t start = 0;
    for (;;) {
        const auto dot = dotted_key.find('.', start);
        const std::string k(dotted_key.substr(start, dot == std::string_view::npos ? dotted_key.npos : dot - start));
        if (k.empty())
            invalid("malformed override key '" + std::string(dotted_key) + "'");
        if (!cur->is_object())
            invalid("override '" + std::string(dotted_key) + "' descends into a non-table");
        if (dot == std::string_view::npos) {
            (*cur)[k] = parsed;
            return;
        }
        cur = &(*cur)[k];
        if (cur->is_null())
            *cur = nlohmann::json::object();
        start = dot + 1;
    }
}

RunConfig parse_run_config(const nlohmann::json& j)
{
    if (!j.is_object())
        invalid("configuration must be a table");
    static const std::set<std::string> known{"command", "seed", "output", "workers", "grid", "coefficient",
                                             "solver",  "triple", "oracle", "estimates"};
    for (const auto& [k, v] : j.items())
        require(known.count(k) > 0, "unknown key '" + k + "'");

    RunConfig c;
    c.source = j;
    read(j, {"command"}, c.command);
    read(j, {"seed"}, c.seed);
    read(j, {"output"}, c.output);
    read(j, {"workers"}, c.workers);

    read(j, {"grid", "d"}, c.d);
    read(j, {"grid", "n"}, c.n);
    read(j, {"grid", "L"}, c.length);
    read(j, {"grid", "H"}, c.height);
    read(j, {"grid", "nd"}, c.nd);
    read(j, {"grid", "geometry"}, c.geometry);

    read(j, {"coefficient", "expr"}, c.coefficient);
    read(j, {"coefficient", "p"}, c.p);
    read(j, {"coefficient", "t"}, c.t);
    read(j, {"coefficient", "percentile"}, c.percentile);

    if (const json* l = find(j, {"solver", "lambda"})) {
        // always a list of values; [-1, 2] means two real parameters
        if (l->is_array()) {
            for (const auto& e : *l)
                c.lambdas.push_back(read_lambda(e));
        } else {
            c.lambdas.push_back(read_lambda(*l));
        }
    }
    read(j, {"solver", "method"}, c.method);
    read(j, {"solver", "factorization"}, c.factorization);
    read(j, {"solver", "tolerance"}, c.tolerance);
    read(j, {"solver", "max_iterations"}, c.max_iterations);
    read(j, {"solver", "restart"}, c.restart);
    read(j, {"solver", "norm_iterations"}, c.norm_iterations);
    read(j, {"solver", "residual_threshold"}, c.residual_threshold);
    read(j, {"solver", "rhs"}, c.rhs);

    read(j, {"triple", "n"}, c.triple_n);
    read(j, {"triple", "trials"}, c.triple_trials);
    read(j, {"oracle", "grids"}, c.oracle_grids);
    read(j, {"estimates", "grids"}, c.sweep_grids);
    read(j, {"estimates", "samples"}, c.samples);
    read(j, {"estimates", "lemma32_p"}, c.lemma32_p);
    read(j, {"estimates", "lemma32_s"}, c.lemma32_s);
    read(j, {"estimates", "lemma33_t"}, c.lemma33_t);
    read(j, {"estimates", "lemma35_s"}, c.lemma35_s);
    read(j, {"estimates", "lemma35_eps"}, c.lemma35_eps);

    static const std::set<std::string> commands{"", "triple-check", "solve", "oracle-compare", "estimates", "lambda0"};
    require(commands.count(c.command) > 0, "unknown command '" + c.command + "'");
    require(c.d == 2 || c.d == 3, "grid.d must be 2 or 3");
    require(c.n >= 4 && c.n % 2 == 0, "grid.n must be even and at least 4");
    require(std::isfinite(c.length) && c.length > 0.0, "grid.L must be positive");
    require(std::isfinite(c.height) && c.height > 0.0, "grid.H must be positive");
    require(c.nd >= 2, "grid.nd must be at least 2");
    require(c.geometry == "slab" || c.geometry == "halfspace", "grid.geometry must be slab or halfspace");
    try {
        Expression::parse(c.coefficient);
    } catch (const Error& e) {
        if (c.coefficient.rfind("csv:", 0) != 0 && !c.coefficient.ends_with(".csv"))
            invalid(std::string("coefficient.expr: ") + e.what());
    }
    try {
        Expression::parse(c.rhs);
    } catch (const Error& e) {
        invalid(std::string("solver.rhs: ") + e.what());
    }
    require(c.p > 0.0, "coefficient.p must be positive");
    require(c.t > 0.0 && c.t < 1.0, "coefficient.t must lie in (0, 1)");
    require(c.percentile > 0.0 && c.percentile <= 1.0, "coefficient.percentile must lie in (0, 1]");
    for (const cplx& l : c.lambdas) {
        require(std::isfinite(l.real()) && std::isfinite(l.imag()), "solver.lambda must be finite");
        require(!on_cut(l), "solver.lambda must avoid [0, inf)");
    }
    require(c.method == "automatic" || c.method == "neumann_series" || c.method == "krylov",
            "solver.method must be automatic, neumann_series or krylov");
    require(c.factorization == "factored" || c.factorization == "unfactored",
            "solver.factorization must be factored or unfactored");
    require(c.tolerance > 0.0 && c.tolerance < 1.0, "solver.tolerance must lie in (0, 1)");
    require(c.max_iterations >= 1, "solver.max_iterations must be positive");
    require(c.restart >= 1, "solver.restart must be positive");
    require(c.norm_iterations >= 1, "solver.norm_iterations must be positive");
    require(c.residual_threshold > 0.0, "solver.residual_threshold must be positive");
    require(c.workers >= 0, "workers must be non-negative");
    require(c.triple_n >= 3, "triple.n must be at least 3");
    require(c.triple_trials >= 1, "triple.trials must be positive");
    require(!c.oracle_grids.empty(), "oracle.grids must not be empty");
    for (int g : c.oracle_grids)
        require(g >= 4 && g % 2 == 0, "oracle.grids entries must be even and at least 4");
    require(!c.sweep_grids.empty(), "estimates.grids must not be empty");
    for (int g : c.sweep_grids)
        require(g >= 4 && g % 2 == 0, "estimates.grids entries must be even and at least 4");
    require(c.samples >= 100, "estimates.samples must be at least 100");
    require(c.lemma32_p >= 1.0 && c.lemma32_p <= 2.0, "estimates.lemma32_p must lie in [1, 2]");
    require(c.lemma33_t > 0.0 && c.lemma33_t <= 1.0, "estimates.lemma33_t must lie in (0, 1]");
    require(c.lemma35_s >= 0.0 && c.lemma35_s < 1.0, "estimates.lemma35_s must lie in [0, 1)");
    require(c.lemma35_eps > 0.0, "estimates.lemma35_eps must be positive");
    return c;
}

nlohmann::json to_json(const RunConfig& c)
{
    nlohmann::json lambdas = nlohmann::json::array();
    for (const cplx& l : c.lambdas)
        lambdas.push_back({l.real(), l.imag()});
    return {
        {"command", c.command},
        {"seed", c.seed},
        {"output", c.output},
        {"workers", c.workers},
        {"grid", {{"d", c.d}, {"n", c.n}, {"L", c.length}, {"H", c.height}, {"nd", c.nd}, {"geometry", c.geometry}}},
        {"coefficient", {{"expr", c.coefficient}, {"p", c.p}, {"t", c.t}, {"percentile", c.percentile}}},
        {"solver",
         {{"lambda", lambdas},
          {"method", c.method},
          {"factorization", c.factorization},
          {"tolerance", c.tolerance},
          {"max_iterations", c.max_iterations},
          {"restart", c.restart},
          {"norm_iterations", c.norm_iterations},
          {"residual_threshold", c.residual_threshold},
          {"rhs", c.rhs}}},
        {"triple", {{"n", c.triple_n}, {"trials", c.triple_trials}}},
        {"oracle", {{"grids", c.oracle_grids}}},
        {"estimates",
         {{"grids", c.sweep_grids},
          {"samples", c.samples},
          {"lemma32_p", c.lemma32_p},
          {"lemma32_s", c.lemma32_s},
          {"lemma33_t", c.lemma33_t},
          {"lemma35_s", c.lemma35_s},
          {"lemma35_eps", c.lemma35_eps}}},
    };
}

} // namespace robinlap
