#include "loadcast/formula.hpp"

#include <cctype>
#include <set>

namespace loadcast {

namespace {

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eof() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    size_t pos() const { return pos_; }

    [[noreturn]] void fail(const std::string& msg) {
        throw DataError("formula parse error at position " + std::to_string(pos_) + ": " + msg);
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string identifier() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("expected identifier");
        return text_.substr(start, pos_ - start);
    }

    int integer() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected integer");
        return std::stoi(text_.substr(start, pos_ - start));
    }

private:
    const std::string& text_;
    size_t pos_ = 0;
};

FormulaTerm parse_term(Lexer& lex) {
    std::string name = lex.identifier();
    if (name == "s") {
        lex.expect('(');
        SmoothTerm t;
        t.var = lex.identifier();
        lex.expect(',');
        if (lex.identifier() != "k") lex.fail("expected k=");
        lex.expect('=');
        t.k = lex.integer();
        if (t.k < 3) lex.fail("k below minimum of 3");
        if (lex.accept(',')) {
            if (lex.identifier() != "cyclic") lex.fail("expected 'cyclic'");
            t.cyclic = true;
        }
        lex.expect(')');
        return t;
    }
    if (name == "te") {
        lex.expect('(');
        TensorTerm t;
        t.var1 = lex.identifier();
        lex.expect(',');
        t.var2 = lex.identifier();
        lex.expect(',');
        if (lex.identifier() != "k") lex.fail("expected k=");
        lex.expect('=');
        t.k = lex.integer();
        if (t.k < 3) lex.fail("k below minimum of 3");
        lex.expect(')');
        return t;
    }
    if (name == "lagterm") {
        lex.expect('(');
        ByLagTerm t;
        t.var = lex.identifier();
        lex.expect(',');
        if (lex.identifier() != "by") lex.fail("expected by=");
        lex.expect('=');
        t.by = lex.identifier();
        lex.expect(')');
        return t;
    }
    if (lex.accept(':')) {
        CatInteraction t;
        t.a = name;
        t.b = lex.identifier();
        return t;
    }
    return LinearTerm{name};
}

}  // namespace

Formula parse_formula(const std::string& text) {
    Lexer lex(text);
    Formula f;
    f.response = lex.identifier();
    lex.expect('~');

    // Intercept-only form.
    if (lex.peek() == '1') {
        lex.expect('1');
        if (!lex.eof()) lex.fail("unexpected input after intercept-only model");
        return f;
    }

    std::set<std::string> seen;
    while (true) {
        FormulaTerm term = parse_term(lex);
        std::string label = term_label(term);
        if (!seen.insert(label).second) lex.fail("duplicate term '" + label + "'");
        f.terms.push_back(std::move(term));
        if (lex.eof()) break;
        lex.expect('+');
    }
    if (f.terms.empty()) lex.fail("expected at least one term");
    return f;
}

std::string term_label(const FormulaTerm& term) {
    struct Labeler {
        std::string operator()(const LinearTerm& t) const { return t.var; }
        std::string operator()(const CatInteraction& t) const { return t.a + ":" + t.b; }
        std::string operator()(const SmoothTerm& t) const {
            return "s(" + t.var + ", k=" + std::to_string(t.k) + (t.cyclic ? ", cyclic)" : ")");
        }
        std::string operator()(const TensorTerm& t) const {
            return "te(" + t.var1 + ", " + t.var2 + ", k=" + std::to_string(t.k) + ")";
        }
        std::string operator()(const ByLagTerm& t) const {
            return "lagterm(" + t.var + ", by=" + t.by + ")";
        }
    };
    return std::visit(Labeler{}, term);
}

std::string print_formula(const Formula& formula) {
    std::string out = formula.response + " ~ ";
    if (formula.terms.empty()) return out + "1";
    for (size_t i = 0; i < formula.terms.size(); ++i) {
        if (i) out += " + ";
        out += term_label(formula.terms[i]);
    }
    return out;
}

std::vector<std::string> formula_variables(const Formula& formula) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto add = [&](const std::string& v) {
        if (seen.insert(v).second) out.push_back(v);
    };
    struct Collect {
        decltype(add)& push;
        void operator()(const LinearTerm& t) { push(t.var); }
        void operator()(const CatInteraction& t) {
            push(t.a);
            push(t.b);
        }
        void operator()(const SmoothTerm& t) { push(t.var); }
        void operator()(const TensorTerm& t) {
            push(t.var1);
            push(t.var2);
        }
        void operator()(const ByLagTerm& t) {
            push(t.var);
            push(t.by);
        }
    };
    Collect c{add};
    for (const auto& term : formula.terms) std::visit(c, term);
    return out;
}

}  // namespace loadcast
