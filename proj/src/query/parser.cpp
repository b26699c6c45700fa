#include "codm/query/parser.hpp"

#include "codm/error.hpp"

#include <array>
#include <cctype>
#include <climits>
#include <cmath>
#include <charconv>

namespace codm::query {

namespace {

constexpr std::array kKeywords = {
    "in", "from", "and", "or", "not", "AND", "OR", "NOT", "is", "null", "true", "false",
    "begin", "over", "before", "where", "after", "end", "return", "distinct",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

[[noreturn]] void syntax_error(int line, int col, const std::string& what) {
    throw Error(ErrorCode::SyntaxError,
                std::to_string(line) + ":" + std::to_string(col) + ": " + what);
}

} // namespace

bool is_keyword(std::string_view word) noexcept {
    for (const char* k : kKeywords)
        if (word == k) return true;
    return false;
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1;
    int col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    auto peek = [&](std::size_t off) { return i + off < text.size() ? text[i + off] : '\0'; };

    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.column = col;
        t.offset = i;
        using K = Token::Kind;

        if (c == '0' && (peek(1) == 'x' || peek(1) == 'X') &&
            std::isxdigit(static_cast<unsigned char>(peek(2)))) {
            std::size_t j = i + 2;
            while (j < text.size() && std::isxdigit(static_cast<unsigned char>(text[j]))) ++j;
            t.kind = K::Hex;
            t.text = std::string(text.substr(i, j - i));
            auto [p, ec] = std::from_chars(text.data() + i + 2, text.data() + j, t.ref_id, 16);
            if (ec != std::errc{}) syntax_error(line, col, "hex reference out of range");
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            bool real = false;
            if (j + 1 < text.size() && text[j] == '.' &&
                std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
                real = true;
                ++j;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            }
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
                if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
                    real = true;
                    j = k;
                    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
                        ++j;
                }
            }
            t.text = std::string(text.substr(i, j - i));
            if (real) {
                t.kind = K::Real;
                auto [p, ec] = std::from_chars(text.data() + i, text.data() + j, t.real_value);
                if (ec != std::errc{}) syntax_error(line, col, "bad real literal");
            } else {
                t.kind = K::Int;
                std::uint64_t u = 0;
                auto [p, ec] = std::from_chars(text.data() + i, text.data() + j, u);
                if (ec != std::errc{} || u > (std::uint64_t{1} << 63))
                    syntax_error(line, col, "integer literal out of range");
                // 2^63 is only representable negated; the parser folds the sign
                t.ref_id = u;
                t.int_value = static_cast<std::int64_t>(u);
            }
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            t.text = std::string(text.substr(i, j - i));
            if (j + 1 < text.size() && text[j] == '#' &&
                std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
                std::size_t k = j + 1;
                while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
                t.kind = K::Ref;
                auto [p, ec] = std::from_chars(text.data() + j + 1, text.data() + k, t.ref_id);
                if (ec != std::errc{}) syntax_error(line, col, "reference id out of range");
                advance(k - i);
            } else {
                t.kind = K::Ident;
                advance(j - i);
            }
            out.push_back(std::move(t));
            continue;
        }
        if (c == '"') {
            std::string s;
            std::size_t j = i + 1;
            bool closed = false;
            while (j < text.size()) {
                const char ch = text[j];
                if (ch == '"') {
                    closed = true;
                    ++j;
                    break;
                }
                if (ch == '\\' && j + 1 < text.size()) {
                    const char e = text[j + 1];
                    s.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
                    j += 2;
                    continue;
                }
                s.push_back(ch);
                ++j;
            }
            if (!closed) syntax_error(line, col, "unterminated string");
            t.kind = K::String;
            t.text = std::move(s);
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }

        auto two = [&](char a, char b) { return c == a && peek(1) == b; };
        std::size_t len = 2;
        if (two('<', '=')) t.kind = K::Le;
        else if (two('>', '=')) t.kind = K::Ge;
        else if (two('=', '=')) t.kind = K::EqEq;
        else if (two('!', '=')) t.kind = K::Ne;
        else if (two(':', '=')) t.kind = K::Define;
        else if (two('&', '&')) t.kind = K::AndAnd;
        else if (two('|', '|')) t.kind = K::OrOr;
        else {
            len = 1;
            switch (c) {
            case '{': t.kind = K::LBrace; break;
            case '}': t.kind = K::RBrace; break;
            case '<': t.kind = K::LAngle; break;
            case '>': t.kind = K::RAngle; break;
            case '=': t.kind = K::Assign; break;
            case ':': t.kind = K::Colon; break;
            case ',': t.kind = K::Comma; break;
            case '|': t.kind = K::Bar; break;
            case '.': t.kind = K::Dot; break;
            case '(': t.kind = K::LParen; break;
            case ')': t.kind = K::RParen; break;
            case ';': t.kind = K::Semicolon; break;
            case '+': t.kind = K::Plus; break;
            case '-': t.kind = K::Minus; break;
            case '*': t.kind = K::Star; break;
            case '/': t.kind = K::Slash; break;
            case '!': t.kind = K::Bang; break;
            default:
                syntax_error(line, col, std::string("unexpected character '") + c + "'");
            }
        }
        t.text = std::string(text.substr(i, len));
        advance(len);
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Token::Kind::End;
    end.line = line;
    end.column = col;
    end.offset = text.size();
    out.push_back(end);
    return out;
}

namespace {

using K = Token::Kind;

class Parser {
public:
    Parser(std::string_view text, const Schema& schema) : tokens_(tokenize(text)), schema_(schema) {}

    Query top_query() {
        Query q;
        if (at(K::Ident) && peek(1).kind == K::Assign && !is_keyword(cur().text)) {
            q.name = cur().text;
            pos_ += 2;
        }
        query_body(q);
        expect(K::End, "end of query");
        return q;
    }

    Expr top_expr() {
        Expr e = expr();
        expect(K::End, "end of expression");
        return e;
    }

private:
    const Token& cur() const { return tokens_[pos_]; }
    const Token& peek(std::size_t n) const {
        return tokens_[std::min(pos_ + n, tokens_.size() - 1)];
    }
    bool at(K k) const { return cur().kind == k; }
    bool at_word(std::string_view w) const { return at(K::Ident) && cur().text == w; }

    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = cur();
        std::string found = t.kind == K::End ? "end of input"
                            : t.kind == K::String ? "string"
                                                  : "'" + t.text + "'";
        syntax_error(t.line, t.column, "expected " + expected + ", found " + found);
    }

    void expect(K k, const std::string& what) {
        if (!at(k)) fail(what);
        ++pos_;
    }
    void expect_word(std::string_view w) {
        if (!at_word(w)) fail("'" + std::string(w) + "'");
        ++pos_;
    }
    bool accept(K k) {
        if (!at(k)) return false;
        ++pos_;
        return true;
    }
    bool accept_word(std::string_view w) {
        if (!at_word(w)) return false;
        ++pos_;
        return true;
    }

    std::string ident(const std::string& what) {
        if (!at(K::Ident) || is_keyword(cur().text)) fail(what);
        return tokens_[pos_++].text;
    }

    // "{" body "}" ["<" rets ">"]
    void query_body(Query& q) {
        expect(K::LBrace, "'{'");
        if (accept_word("distinct")) q.distinct = true;
        if (at_word("begin")) {
            block_body(q);
            expect(K::RBrace, "'}'");
            return;
        }
        q.sources.push_back(source());
        while (accept(K::Comma)) q.sources.push_back(source());
        if (accept(K::Bar)) q.predicate = expr();
        expect(K::RBrace, "',', '|' or '}'");
        if (accept(K::LAngle)) q.returns = returns();
    }

    void block_body(Query& q) {
        Blocks b;
        expect_word("begin");
        b.begin = statements();
        expect_word("over");
        q.sources.push_back(source());
        if (accept_word("before")) b.before = statements();
        expect_word("where");
        expect(K::LParen, "'('");
        q.predicate = expr();
        expect(K::RParen, "')'");
        if (accept_word("after")) b.after = statements();
        expect_word("end");
        b.end = statements();
        expect_word("return");
        expect(K::LAngle, "'<'");
        q.returns = returns();
        q.blocks = std::move(b);
    }

    std::vector<Assignment> statements() {
        expect(K::LBrace, "'{'");
        std::vector<Assignment> out;
        while (!accept(K::RBrace)) {
            Assignment a;
            a.var = ident("variable name or '}'");
            expect(K::Define, "':='");
            a.value = expr();
            if (!at(K::RBrace)) expect(K::Semicolon, "';'");
            out.push_back(std::move(a));
        }
        return out;
    }

    std::vector<Return> returns() {
        std::vector<Return> out;
        do {
            Return r;
            if (at(K::Ident) && peek(1).kind == K::Assign && !is_keyword(cur().text)) {
                r.name = cur().text;
                pos_ += 2;
            }
            r.expr = additive();
            out.push_back(std::move(r));
        } while (accept(K::Comma));
        expect(K::RAngle, "',' or '>'");
        return out;
    }

    Source source() {
        Source s;
        if (at(K::Ident) && !is_keyword(cur().text) &&
            (peek(1).kind == K::Colon ||
             (peek(1).kind == K::Ident && (peek(1).text == "in" || peek(1).text == "from")))) {
            s.binder = cur().text;
            pos_ += 2;
        }
        if (at(K::LBrace)) {
            s.kind = Source::Kind::Literal;
            literal(s);
            return s;
        }
        s.kind = Source::Kind::Path;
        Expr base;
        if (at(K::Ref) || at(K::Hex)) base = Expr::make_const(constant());
        else base = Expr::make_ident(ident("source concept, view or variable"));
        std::vector<std::string> steps;
        while (accept(K::Dot)) steps.push_back(ident("dimension name"));
        s.path = steps.empty() ? std::move(base) : Expr::make_member(std::move(base), std::move(steps));
        if (accept(K::Assign)) s.restriction = additive();
        return s;
    }

    void literal(Source& s) {
        expect(K::LBrace, "'{'");
        do {
            std::vector<Value> row;
            if (accept(K::LAngle)) {
                row.push_back(constant());
                while (accept(K::Comma)) row.push_back(constant());
                expect(K::RAngle, "',' or '>'");
            } else {
                row.push_back(constant());
            }
            s.rows.push_back(std::move(row));
        } while (accept(K::Comma));
        expect(K::RBrace, "',' or '}'");
        if (accept(K::LAngle)) {
            s.columns.push_back(ident("column name"));
            while (accept(K::Comma)) s.columns.push_back(ident("column name"));
            expect(K::RAngle, "',' or '>'");
        }
    }

    bool at_constant() const {
        switch (cur().kind) {
        case K::Int: case K::Real: case K::String: case K::Ref: case K::Hex: return true;
        case K::Minus: return peek(1).kind == K::Int || peek(1).kind == K::Real;
        case K::Ident: return cur().text == "true" || cur().text == "false" || cur().text == "null";
        default: return false;
        }
    }

    Value constant() {
        const Token& t = cur();
        switch (t.kind) {
        case K::Int:
            if (t.ref_id > static_cast<std::uint64_t>(INT64_MAX)) fail("integer in range");
            ++pos_;
            return t.int_value;
        case K::Real: ++pos_; return t.real_value;
        case K::String: ++pos_; return t.text;
        case K::Hex: ++pos_; return ItemRef{kTop, t.ref_id};
        case K::Ref: {
            auto id = schema_.find(t.text);
            if (!id)
                throw Error(ErrorCode::UnknownConcept,
                            std::to_string(t.line) + ":" + std::to_string(t.column) +
                                ": no concept named '" + t.text + "'",
                            t.text);
            ++pos_;
            return ItemRef{*id, t.ref_id};
        }
        case K::Minus: {
            const Token& n = peek(1);
            pos_ += 2;
            if (n.kind == K::Real) return -n.real_value;
            if (n.ref_id == (std::uint64_t{1} << 63)) return INT64_MIN;
            return -n.int_value;
        }
        case K::Ident:
            if (t.text == "true") { ++pos_; return true; }
            if (t.text == "false") { ++pos_; return false; }
            if (t.text == "null") { ++pos_; return Null{}; }
            break;
        default: break;
        }
        fail("constant");
    }

    Expr expr() { return or_expr(); }

    Expr or_expr() {
        Expr lhs = and_expr();
        while (accept_word("or") || accept_word("OR") || accept(K::OrOr))
            lhs = Expr::make_binary(BinaryOp::Or, std::move(lhs), and_expr());
        return lhs;
    }

    Expr and_expr() {
        Expr lhs = not_expr();
        while (accept_word("and") || accept_word("AND") || accept(K::AndAnd))
            lhs = Expr::make_binary(BinaryOp::And, std::move(lhs), not_expr());
        return lhs;
    }

    Expr not_expr() {
        if (accept_word("not") || accept_word("NOT") || accept(K::Bang))
            return Expr::make_unary(UnaryOp::Not, not_expr());
        return comparison();
    }

    Expr comparison() {
        Expr lhs = additive();
        if (accept_word("is")) {
            expect_word("null");
            return Expr::make_is_null(std::move(lhs));
        }
        std::optional<BinaryOp> op;
        switch (cur().kind) {
        case K::EqEq: op = BinaryOp::Eq; break;
        case K::Ne: op = BinaryOp::Ne; break;
        case K::LAngle: op = BinaryOp::Lt; break;
        case K::Le: op = BinaryOp::Le; break;
        case K::RAngle: op = BinaryOp::Gt; break;
        case K::Ge: op = BinaryOp::Ge; break;
        default: return lhs;
        }
        ++pos_;
        return Expr::make_binary(*op, std::move(lhs), additive());
    }

    Expr additive() {
        Expr lhs = multiplicative();
        for (;;) {
            if (accept(K::Plus)) lhs = Expr::make_binary(BinaryOp::Add, std::move(lhs), multiplicative());
            else if (accept(K::Minus)) lhs = Expr::make_binary(BinaryOp::Sub, std::move(lhs), multiplicative());
            else return lhs;
        }
    }

    Expr multiplicative() {
        Expr lhs = unary();
        for (;;) {
            if (accept(K::Star)) lhs = Expr::make_binary(BinaryOp::Mul, std::move(lhs), unary());
            else if (accept(K::Slash)) lhs = Expr::make_binary(BinaryOp::Div, std::move(lhs), unary());
            else return lhs;
        }
    }

    Expr unary() {
        if (at(K::Minus) && peek(1).kind != K::Int && peek(1).kind != K::Real) {
            ++pos_;
            return Expr::make_unary(UnaryOp::Neg, unary());
        }
        return postfix();
    }

    Expr postfix() {
        Expr base = primary();
        if (!at(K::Dot)) return base;
        std::vector<std::string> steps;
        while (accept(K::Dot)) steps.push_back(ident("property name"));
        return Expr::make_member(std::move(base), std::move(steps));
    }

    Expr primary() {
        if (at_constant()) return Expr::make_const(constant());
        if (accept(K::LParen)) {
            Expr inner = expr();
            expect(K::RParen, "')'");
            return inner;
        }
        if (at(K::LBrace)) {
            Query q;
            query_body(q);
            return Expr::make_nested(std::move(q));
        }
        if (at(K::Ident) && peek(1).kind == K::LParen) {
            if (auto fn = agg_from_name(cur().text)) {
                pos_ += 2;
                Expr arg = expr();
                expect(K::RParen, "')'");
                return Expr::make_aggregate(*fn, std::move(arg));
            }
            fail("aggregate function (size, sum, avg, min, max)");
        }
        return Expr::make_ident(ident("expression"));
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    const Schema& schema_;
};

// ---- printing ----

constexpr int kPrecOr = 1, kPrecAnd = 2, kPrecNot = 3, kPrecCmp = 4, kPrecAdd = 5, kPrecMul = 6,
              kPrecNeg = 7, kPrecAtom = 8;

int precedence(const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::Binary:
        switch (e.binary) {
        case BinaryOp::Or: return kPrecOr;
        case BinaryOp::And: return kPrecAnd;
        case BinaryOp::Add:
        case BinaryOp::Sub: return kPrecAdd;
        case BinaryOp::Mul:
        case BinaryOp::Div: return kPrecMul;
        default: return kPrecCmp;
        }
    case Expr::Kind::Unary: return e.unary == UnaryOp::Not ? kPrecNot : kPrecNeg;
    case Expr::Kind::IsNull: return kPrecCmp;
    case Expr::Kind::Const: {
        // negative literals re-parse as a folded constant, but only when they
        // are not the operand of another minus
        if (const auto* i = std::get_if<std::int64_t>(&e.constant); i && *i < 0) return kPrecNeg;
        if (const auto* d = std::get_if<double>(&e.constant); d && std::signbit(*d)) return kPrecNeg;
        return kPrecAtom;
    }
    default: return kPrecAtom;
    }
}

const char* op_text(BinaryOp op) {
    switch (op) {
    case BinaryOp::Or: return "OR";
    case BinaryOp::And: return "AND";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    }
    return "?";
}

class Printer {
public:
    explicit Printer(const Schema& schema) : schema_(schema) {}

    std::string query(const Query& q, bool top) {
        std::string out;
        if (top && !q.name.empty()) out += q.name + " = ";
        out += "{";
        if (q.distinct) out += "distinct ";
        if (q.blocks) {
            const Blocks& b = *q.blocks;
            out += "begin " + statements(b.begin) + " over ";
            out += q.sources.empty() ? std::string("?") : source(q.sources.front());
            if (!b.before.empty()) out += " before " + statements(b.before);
            out += " where (" + (q.predicate ? expr(*q.predicate, 0) : std::string("true")) + ")";
            if (!b.after.empty()) out += " after " + statements(b.after);
            out += " end " + statements(b.end) + " return <" + returns(q.returns) + ">}";
            return out;
        }
        for (std::size_t i = 0; i < q.sources.size(); ++i) {
            if (i) out += ", ";
            out += source(q.sources[i]);
        }
        if (q.predicate) out += " | " + expr(*q.predicate, 0);
        out += "}";
        if (!q.returns.empty()) out += " <" + returns(q.returns) + ">";
        return out;
    }

    std::string expr(const Expr& e, int min_prec) {
        std::string body = raw(e);
        return precedence(e) < min_prec ? "(" + body + ")" : body;
    }

private:
    std::string statements(const std::vector<Assignment>& stmts) {
        std::string out = "{";
        for (const auto& a : stmts) out += a.var + " := " + expr(a.value, 0) + "; ";
        if (!stmts.empty()) out.pop_back();
        return out + "}";
    }

    std::string returns(const std::vector<Return>& rets) {
        std::string out;
        for (std::size_t i = 0; i < rets.size(); ++i) {
            if (i) out += ", ";
            if (!rets[i].name.empty()) out += rets[i].name + " = ";
            out += expr(rets[i].expr, kPrecAdd);
        }
        return out;
    }

    std::string source(const Source& s) {
        std::string out;
        if (!s.binder.empty()) out += s.binder + ": ";
        if (s.kind == Source::Kind::Literal) {
            out += "{";
            for (std::size_t i = 0; i < s.rows.size(); ++i) {
                if (i) out += ", ";
                const auto& row = s.rows[i];
                if (row.size() == 1) {
                    out += schema_.format_value(row.front());
                    continue;
                }
                out += "<";
                for (std::size_t j = 0; j < row.size(); ++j)
                    out += (j ? ", " : "") + schema_.format_value(row[j]);
                out += ">";
            }
            out += "}";
            if (!s.columns.empty()) {
                out += " <";
                for (std::size_t j = 0; j < s.columns.size(); ++j)
                    out += (j ? ", " : "") + s.columns[j];
                out += ">";
            }
            return out;
        }
        out += expr(s.path, kPrecAtom);
        if (s.restriction) out += " = " + expr(*s.restriction, kPrecAdd);
        return out;
    }

    // a following '<' would otherwise open the return list of `{...}`
    std::string operand_text(const Expr& e, int min_prec) {
        if (e.kind == Expr::Kind::Nested && e.nested->returns.empty() && !e.nested->blocks)
            return "(" + raw(e) + ")";
        return expr(e, min_prec);
    }

    std::string raw(const Expr& e) {
        switch (e.kind) {
        case Expr::Kind::Const: return schema_.format_value(e.constant);
        case Expr::Kind::Ident: return e.name;
        case Expr::Kind::Member: {
            const Expr& base = e.args.front();
            std::string b;
            const bool bare = base.kind == Expr::Kind::Ident ||
                              (base.kind == Expr::Kind::Const && is_ref(base.constant));
            b = bare ? raw(base) : "(" + raw(base) + ")";
            for (const auto& s : e.steps) b += "." + s;
            return b;
        }
        case Expr::Kind::Unary: {
            const Expr& operand = e.args.front();
            if (e.unary == UnaryOp::Not) return "NOT " + operand_text(operand, kPrecNot);
            if (operand.kind == Expr::Kind::Const && is_numeric(operand.constant))
                return "-(" + raw(operand) + ")";
            return "- " + operand_text(operand, kPrecNeg);
        }
        case Expr::Kind::Binary: {
            const int p = precedence(e);
            int lmin = p;
            int rmin = p + 1;
            if (p == kPrecCmp) lmin = rmin = kPrecAdd;
            return operand_text(e.args[0], lmin) + " " + op_text(e.binary) + " " +
                   operand_text(e.args[1], rmin);
        }
        case Expr::Kind::IsNull: return expr(e.args.front(), kPrecAdd) + " is null";
        case Expr::Kind::Aggregate:
            return std::string(agg_name(e.agg)) + "(" + expr(e.args.front(), 0) + ")";
        case Expr::Kind::Nested: return query(*e.nested, false);
        }
        return "?";
    }

    const Schema& schema_;
};

} // namespace

Query parse_query(std::string_view text, const Schema& schema) {
    return Parser(text, schema).top_query();
}

Expr parse_expr(std::string_view text, const Schema& schema) {
    return Parser(text, schema).top_expr();
}

std::string print_query(const Query& q, const Schema& schema) {
    return Printer(schema).query(q, true);
}

std::string print_expr(const Expr& e, const Schema& schema) { return Printer(schema).expr(e, 0); }

} // namespace codm::query
