#include "codm/io/text.hpp"

#include "codm/query/parser.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace codm::io {

namespace {

using K = query::Token::Kind;

class Cursor {
public:
    explicit Cursor(std::string_view text) : toks_(query::tokenize(text)) {}

    const query::Token& cur() const { return toks_[pos_]; }
    bool at(K k) const { return cur().kind == k; }
    bool at_word(std::string_view w) const { return at(K::Ident) && cur().text == w; }
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
    const query::Token& take(K k, const char* what) {
        if (!at(k)) fail(what);
        return toks_[pos_++];
    }
    [[noreturn]] void fail(const std::string& what) const {
        const auto& t = cur();
        throw Error(ErrorCode::SyntaxError,
                    std::to_string(t.line) + ":" + std::to_string(t.column) + ": expected " +
                        what + ", found " + (t.kind == K::End ? "end of input" : "'" + t.text + "'"));
    }

    /// Dimension names may be dotted after merges.
    std::string dotted_name() {
        std::string name = take(K::Ident, "a name").text;
        while (accept(K::Dot)) name += "." + take(K::Ident, "a name").text;
        return name;
    }

    Value value(const Schema& schema) {
        const auto& t = cur();
        switch (t.kind) {
        case K::Int:
            if (t.ref_id > static_cast<std::uint64_t>(INT64_MAX)) fail("an integer in range");
            ++pos_;
            return t.int_value;
        case K::Real: ++pos_; return t.real_value;
        case K::String: ++pos_; return t.text;
        case K::Ref: {
            auto c = schema.find(t.text);
            if (!c) throw Error(ErrorCode::UnknownConcept, "no concept named '" + t.text + "'", t.text);
            ++pos_;
            return ItemRef{*c, t.ref_id};
        }
        case K::Minus: {
            ++pos_;
            const auto& n = cur();
            if (n.kind == K::Real) { ++pos_; return -n.real_value; }
            if (n.kind != K::Int) fail("a number");
            ++pos_;
            if (n.ref_id == (std::uint64_t{1} << 63)) return INT64_MIN;
            return -n.int_value;
        }
        case K::Ident:
            if (accept_word("null")) return Null{};
            if (accept_word("true")) return true;
            if (accept_word("false")) return false;
            [[fallthrough]];
        default: fail("a value");
        }
    }

private:
    std::vector<query::Token> toks_;
    std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void at_line(std::size_t line, const Error& e) {
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    const ErrorCode code = e.code() == ErrorCode::DanglingReference ? e.code() : ErrorCode::ParseError;
    throw Error(code, "line " + std::to_string(line) + ": " + msg, e.subject());
}

} // namespace

bool is_definition_line(std::string_view line) {
    line = trim(line);
    for (std::string_view w : {"view ", "property ", "constraint ", "multi "})
        if (line.substr(0, w.size()) == w) return true;
    return false;
}

void apply_definition(Database& db, std::string_view line) {
    line = trim(line);
    const auto word_end = line.find(' ');
    if (word_end == std::string_view::npos)
        throw Error(ErrorCode::ParseError, "incomplete definition");
    const std::string_view word = line.substr(0, word_end);
    std::string_view rest = trim(line.substr(word_end + 1));
    auto split_at = [&](std::string_view sep) {
        const auto p = rest.find(sep);
        if (p == std::string_view::npos)
            throw Error(ErrorCode::ParseError, "expected '" + std::string(sep) + "'");
        return std::pair{trim(rest.substr(0, p)), trim(rest.substr(p + sep.size()))};
    };
    auto owner_name = [&](std::string_view qualified) {
        const auto dot = qualified.find('.');
        if (dot == std::string_view::npos)
            throw Error(ErrorCode::ParseError, "expected 'Concept.name'");
        return std::pair{db.schema().id_of(qualified.substr(0, dot)),
                         std::string(qualified.substr(dot + 1))};
    };
    if (word == "view") {
        auto [name, q] = split_at("=");
        db.define_view(std::string(name), query::parse_query(q, db.schema()));
    } else if (word == "property") {
        auto [lhs, body] = split_at(":=");
        auto [owner, name] = owner_name(lhs);
        db.define_property(owner, name, query::parse_expr(body, db.schema()));
    } else if (word == "constraint") {
        auto [lhs, body] = split_at(":");
        auto [owner, name] = owner_name(lhs);
        db.define_constraint(owner, name, query::parse_expr(body, db.schema()));
    } else if (word == "multi") {
        auto [lhs, target] = split_at("->");
        auto [owner, name] = owner_name(lhs);
        db.define_multi(owner, name, db.schema().id_of(target));
    } else {
        throw Error(ErrorCode::ParseError, "unknown definition '" + std::string(word) + "'");
    }
}

std::string definition_text(const Schema& s, const Definition& d) {
    switch (d.kind) {
    case DefKind::view: return "view " + d.name + " = " + query::print_query(d.query, s);
    case DefKind::property:
        return "property " + s.name_of(d.owner) + "." + d.name + " := " + query::print_expr(d.body, s);
    case DefKind::constraint:
        return "constraint " + s.name_of(d.owner) + "." + d.name + " : " +
               query::print_expr(d.body, s);
    case DefKind::multi:
        return "multi " + s.name_of(d.owner) + "." + d.name + " -> " + s.name_of(d.target);
    }
    return {};
}

bool is_concept_line(std::string_view line) {
    line = trim(line);
    return line.substr(0, 8) == "concept " || line.substr(0, 8) == "concept\t";
}

bool is_data_line(std::string_view line) {
    line = trim(line);
    const auto lt = line.find('<');
    if (lt == std::string_view::npos || lt == 0 || line.back() != '>') return false;
    std::string_view head = trim(line.substr(0, lt));
    if (head.empty() || !(std::isalpha(static_cast<unsigned char>(head[0])) || head[0] == '_'))
        return false;
    for (char c : head)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#')) return false;
    return !query::is_keyword(head);
}

std::string print_concept(const Schema& schema, ConceptId c) {
    const Concept& k = schema.get(c);
    std::string out = "concept " + k.name + " {";
    for (std::size_t i = 0; i < k.intent.size(); ++i) {
        const Dimension& d = k.intent[i];
        out += (i ? ", " : " ") + d.name + ": " + schema.name_of(d.domain);
        if (d.nullable) out += " nullable";
        if (d.direct) out += " direct";
        if (d.inline_name) out += " inline";
    }
    out += k.intent.empty() ? "}" : " }";
    if (k.gc_scope == GcScope::local) out += " local";
    if (k.hidden) out += " hidden";
    return out;
}

ConceptSpec parse_concept(std::string_view line) {
    Cursor c(line);
    if (!c.accept_word("concept")) c.fail("'concept'");
    ConceptSpec spec;
    spec.name = c.take(K::Ident, "a concept name").text;
    c.take(K::LBrace, "'{'");
    if (!c.accept(K::RBrace)) {
        do {
            DimSpec d;
            d.name = c.dotted_name();
            c.take(K::Colon, "':'");
            d.domain = c.take(K::Ident, "a domain").text;
            for (;;) {
                if (c.accept_word("nullable")) d.nullable = true;
                else if (c.accept_word("direct")) d.direct = true;
                else if (c.accept_word("inline")) d.inline_name = true;
                else break;
            }
            spec.dims.push_back(std::move(d));
        } while (c.accept(K::Comma));
        c.take(K::RBrace, "'}'");
    }
    for (;;) {
        if (c.accept_word("local")) spec.gc_scope = GcScope::local;
        else if (c.accept_word("hidden")) spec.hidden = true;
        else break;
    }
    if (!c.at(K::End)) c.fail("end of line");
    return spec;
}

std::string print_item(const Schema& schema, const ItemStore& store, ItemRef item,
                       bool with_id) {
    std::string out = schema.name_of(item.concept_id);
    if (with_id) out += "#" + std::to_string(item.id);
    out += " <";
    const auto& values = store.values(item);
    for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? ", " : "") + schema.format_value(values[i]);
    return out + ">";
}

DataLine parse_data_line(std::string_view line, const Schema& schema) {
    Cursor c(line);
    DataLine out;
    if (c.at(K::Ref)) {
        out.concept_name = c.cur().text;
        out.id = c.cur().ref_id;
        c.take(K::Ref, "a concept");
    } else {
        out.concept_name = c.take(K::Ident, "a concept name").text;
    }
    if (!schema.find(out.concept_name))
        throw Error(ErrorCode::UnknownConcept, "no concept named '" + out.concept_name + "'");
    c.take(K::LAngle, "'<'");
    if (!c.accept(K::RAngle)) {
        do out.values.push_back(c.value(schema));
        while (c.accept(K::Comma));
        c.take(K::RAngle, "'>'");
    }
    if (!c.at(K::End)) c.fail("end of line");
    return out;
}

std::string save_snapshot(const Database& db) {
    const Schema& s = db.schema();
    std::string out = "#schema\n";
    const auto order = s.topological_order();
    for (ConceptId c : order) out += print_concept(s, c) + "\n";
    out += "#defs\n";
    for (const auto& d : db.catalog().definitions()) out += definition_text(s, d) + "\n";
    out += "#data\n";
    for (ConceptId c : order) {
        std::uint64_t expected = 1;
        for (ItemRef item : db.store().extent(s, c)) {
            out += print_item(s, db.store(), item, item.id != expected) + "\n";
            expected = item.id + 1;
        }
        if (db.store().next_id(c) != expected)
            out += "@next " + s.name_of(c) + " " + std::to_string(db.store().next_id(c)) + "\n";
    }
    return out;
}

Database load_snapshot(std::string_view text) {
    enum class Section { none, schema, defs, data } section = Section::none;
    Database db;
    std::vector<ConceptSpec> specs;
    std::map<std::string, std::size_t> spec_line;
    std::map<ItemRef, std::size_t> item_line;
    bool schema_done = false;

    auto finish_schema = [&] {
        if (schema_done) return;
        schema_done = true;
        try {
            db.define_concepts(specs);
        } catch (const Error& e) {
            auto it = spec_line.find(e.subject());
            at_line(it == spec_line.end() ? 1 : it->second, e);
        }
    };

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = trim(text.substr(start, nl - start));
        start = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            if (line == "#schema" || line == "#defs" || line == "#data") {
                const Section next = line == "#schema" ? Section::schema
                                     : line == "#defs" ? Section::defs
                                                       : Section::data;
                if (next <= section) throw Error(ErrorCode::ParseError, "section out of order");
                if (next != Section::schema) finish_schema();
                section = next;
                continue;
            }
            switch (section) {
            case Section::none: throw Error(ErrorCode::ParseError, "expected '#schema'");
            case Section::schema: {
                ConceptSpec spec = parse_concept(line);
                spec_line.emplace(spec.name, line_no);
                specs.push_back(std::move(spec));
                break;
            }
            case Section::defs:
                apply_definition(db, line);
                break;
            case Section::data: {
                if (line.substr(0, 6) == "@next ") {
                    std::istringstream in{std::string(line.substr(6))};
                    std::string name;
                    std::uint64_t next = 0;
                    const bool ok = static_cast<bool>(in >> name >> next);
                    if (!ok || !(in >> std::ws).eof())
                        throw Error(ErrorCode::ParseError, "expected '@next Concept n'");
                    const ConceptId c = db.schema().id_of(name);
                    if (next < db.store().next_id(c))
                        throw Error(ErrorCode::ParseError, "'@next' below existing ids");
                    db.mutable_store().set_next_id(c, next);
                    break;
                }
                DataLine d = parse_data_line(line, db.schema());
                const ConceptId c = db.schema().id_of(d.concept_name);
                const Concept& k = db.schema().get(c);
                if (k.primitive) throw Error(ErrorCode::ParseError, "primitive concepts hold no items");
                if (d.values.size() != k.intent.size())
                    throw Error(ErrorCode::ParseError,
                                "'" + k.name + "' expects " + std::to_string(k.intent.size()) +
                                    " values, found " + std::to_string(d.values.size()));
                for (std::size_t i = 0; i < d.values.size(); ++i) {
                    const Dimension& dim = k.intent[i];
                    Value& v = d.values[i];
                    if (is_null(v)) {
                        if (!dim.nullable)
                            throw Error(ErrorCode::ParseError, "null in non-nullable '" + dim.name + "'");
                        continue;
                    }
                    if (dim.domain == kReal)
                        if (const auto* n = std::get_if<std::int64_t>(&v)) v = static_cast<double>(*n);
                    if (value_concept(v) != dim.domain)
                        throw Error(ErrorCode::ParseError,
                                    "value for '" + dim.name + "' is not a '" +
                                        db.schema().name_of(dim.domain) + "'");
                }
                const std::uint64_t next = db.store().next_id(c);
                const ItemRef ref{c, d.id.value_or(next)};
                if (ref.id < next)
                    throw Error(ErrorCode::ParseError,
                                "item id " + std::to_string(ref.id) + " is not increasing");
                db.mutable_store().put_raw(ref, std::move(d.values));
                item_line.emplace(ref, line_no);
                break;
            }
            }
        } catch (const Error& e) {
            at_line(line_no, e);
        }
    }
    if (section == Section::none && !text.empty() && trim(text).size() > 0)
        throw Error(ErrorCode::ParseError, "line 1: expected '#schema'");
    finish_schema();

    for (const auto& [item, line] : item_line)
        for (const Value& v : db.store().values(item))
            if (const auto* r = std::get_if<ItemRef>(&v); r && !db.store().contains(*r))
                throw Error(ErrorCode::DanglingReference,
                            "line " + std::to_string(line) + ": " + db.schema().format_value(v) +
                                " does not exist",
                            db.schema().format_value(v));
    db.mutable_store().recompute_usage(db.schema());
    db.check_all_constraints();
    return db;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

void save_snapshot_file(const Database& db, const std::filesystem::path& path) {
    write_file(path, save_snapshot(db));
}

Database load_snapshot_file(const std::filesystem::path& path) {
    return load_snapshot(read_file(path));
}

} // namespace codm::io
