#include "codm/cli/session.hpp"

#include "codm/analytics/group.hpp"
#include "codm/analytics/inference.hpp"
#include "codm/io/text.hpp"
#include "codm/query/parser.hpp"

#include <json.hpp>

#include <algorithm>
#include <istream>
#include <ostream>

namespace codm::cli {

namespace {

using K = query::Token::Kind;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::size_t display_width(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_dots(std::string_view text) {
    std::vector<std::string> out;
    std::size_t from = 0;
    for (std::size_t next; (next = text.find('.', from)) != std::string_view::npos; from = next + 1)
        out.emplace_back(trim(text.substr(from, next - from)));
    out.emplace_back(trim(text.substr(from)));
    return out;
}

/// Token cursor over one statement; expression arguments are sliced out of
/// the source text by byte offset and handed to the query parser.
class Args {
public:
    explicit Args(std::string_view text) : text_(text), toks_(query::tokenize(text)) {}

    const query::Token& cur() const { return toks_[pos_]; }
    bool at(K k) const { return cur().kind == k; }
    bool at_word(std::string_view w) const { return at(K::Ident) && cur().text == w; }
    bool done() const { return at(K::End); }
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
    std::string word(const char* what) { return take(K::Ident, what).text; }
    void word(std::string_view w) {
        if (!accept_word(w)) fail(("'" + std::string(w) + "'").c_str());
    }
    std::string dotted(const char* what) {
        std::string out = word(what);
        while (accept(K::Dot)) out += "." + word(what);
        return out;
    }
    ItemRef ref(const Schema& s) {
        const auto& t = take(K::Ref, "an item reference such as Concept#1");
        return ItemRef{s.id_of(t.text), t.ref_id};
    }
    void end() {
        if (!done()) fail("end of command");
    }
    [[noreturn]] void fail(const char* what) const {
        const auto& t = cur();
        throw Error(ErrorCode::SyntaxError,
                    std::to_string(t.column) + ": expected " + what + ", found " +
                        (t.kind == K::End ? "end of input" : "'" + t.text + "'"));
    }

    /// Source text from the current token up to (not including) the first
    /// top-level token of kind `stop`, or to the end.
    std::string_view until(K stop) {
        const std::size_t from = cur().offset;
        int depth = 0;
        while (!done()) {
            const K k = cur().kind;
            if (depth == 0 && k == stop) break;
            if (k == K::LParen || k == K::LBrace) ++depth;
            if ((k == K::RParen || k == K::RBrace) && depth > 0) --depth;
            ++pos_;
        }
        return trim(text_.substr(from, cur().offset - from));
    }
    std::string_view rest() {
        const std::string_view out = trim(text_.substr(cur().offset));
        pos_ = toks_.size() - 1;
        return out;
    }

private:
    std::string_view text_;
    std::vector<query::Token> toks_;
    std::size_t pos_ = 0;
};

std::string table_cell(const Database& db, const Value& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* r = std::get_if<ItemRef>(&v))
        return db.store().contains(*r) ? db.item_label(*r) : db.schema().format_value(v);
    return db.schema().format_value(v);
}

nlohmann::json json_value(const Database& db, const Value& v) {
    switch (v.index()) {
    case 0: return nullptr;
    case 1: return std::get<bool>(v);
    case 2: return std::get<std::int64_t>(v);
    case 3: return std::get<double>(v);
    case 4: return std::get<std::string>(v);
    default: return db.schema().format_value(v);
    }
}

/// `agg(measure)`; an empty argument list means no measure.
std::pair<query::AggFn, std::optional<query::Expr>> aggregate_call(Args& a, const Schema& s) {
    const std::string name = a.word("an aggregate");
    const auto fn = query::agg_from_name(name);
    if (!fn) throw Error(ErrorCode::SyntaxError, "unknown aggregate '" + name + "'");
    a.take(K::LParen, "'('");
    const std::string_view inner = a.until(K::RParen);
    a.take(K::RParen, "')'");
    if (inner.empty()) return {*fn, std::nullopt};
    return {*fn, query::parse_expr(inner, s)};
}

std::vector<std::string> shown_list(Args& a) {
    std::vector<std::string> out;
    if (!a.accept_word("show")) return out;
    do out.push_back(a.dotted("a property name"));
    while (a.accept(K::Comma));
    return out;
}

std::optional<query::Expr> filter_clause(Args& a, const Schema& s) {
    if (!a.accept(K::Bar)) return std::nullopt;
    return query::parse_expr(a.rest(), s);
}

std::size_t axis_index(const Database& db, const analytics::CubeSpec& spec, Args& a) {
    if (a.at(K::Int)) {
        const auto n = static_cast<std::size_t>(a.take(K::Int, "an axis").int_value);
        if (n == 0 || n > spec.axes.size())
            throw Error(ErrorCode::NoSuchLevel, "cube has no axis " + std::to_string(n));
        return n - 1;
    }
    const std::string name = a.word("an axis");
    for (std::size_t k = 0; k < spec.axes.size(); ++k)
        if (db.schema().name_of(spec.axes[k].concept_id) == name) return k;
    throw Error(ErrorCode::NoSuchLevel, "cube has no axis '" + name + "'");
}

bool is_query(std::string_view s) {
    if (s.empty()) return false;
    if (s.front() == '{') return true;
    std::size_t i = 0;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
    if (i == 0) return false;
    s = trim(s.substr(i));
    if (s.empty() || s.front() != '=') return false;
    s = trim(s.substr(1));
    return !s.empty() && s.front() == '{';
}

/// Brace depth after `line`, ignoring braces inside string literals.
int brace_delta(std::string_view line) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            --depth;
        }
    }
    return depth;
}

bool is_comment(std::string_view line) { return line.empty() || line.substr(0, 2) == "--"; }

} // namespace

std::optional<Format> parse_format(std::string_view name) {
    if (name == "table") return Format::table;
    if (name == "csv") return Format::csv;
    if (name == "jsonl" || name == "json-lines") return Format::jsonl;
    return std::nullopt;
}

std::string render(const Database& db, const query::ResultConcept& r, Format format) {
    std::string out;
    switch (format) {
    case Format::table: {
        std::vector<std::vector<std::string>> cells;
        std::vector<std::size_t> width;
        for (const auto& c : r.columns) width.push_back(display_width(c.name));
        for (const auto& row : r.rows) {
            auto& line = cells.emplace_back();
            for (std::size_t k = 0; k < row.size(); ++k) {
                line.push_back(table_cell(db, row[k]));
                width[k] = std::max(width[k], display_width(line.back()));
            }
        }
        auto emit = [&](const std::vector<std::string>& line) {
            std::string text;
            for (std::size_t k = 0; k < line.size(); ++k) {
                if (k) text += " | ";
                text += line[k];
                if (k + 1 < line.size()) text.append(width[k] - display_width(line[k]), ' ');
            }
            out += text + "\n";
        };
        std::vector<std::string> header;
        for (const auto& c : r.columns) header.push_back(c.name);
        emit(header);
        std::string rule;
        for (std::size_t k = 0; k < width.size(); ++k)
            rule += (k ? "-+-" : "") + std::string(width[k], '-');
        out += rule + "\n";
        for (const auto& line : cells) emit(line);
        out += "(" + std::to_string(r.rows.size()) + (r.rows.size() == 1 ? " row)\n" : " rows)\n");
        break;
    }
    case Format::csv: {
        for (std::size_t k = 0; k < r.columns.size(); ++k)
            out += (k ? "," : "") + csv_field(r.columns[k].name);
        out += "\n";
        for (const auto& row : r.rows) {
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (k) out += ",";
                if (const auto* s = std::get_if<std::string>(&row[k])) out += csv_field(*s);
                else if (!is_null(row[k])) out += db.schema().format_value(row[k]);
            }
            out += "\n";
        }
        break;
    }
    case Format::jsonl:
        for (const auto& row : r.rows) {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (std::size_t k = 0; k < row.size(); ++k)
                obj[r.columns[k].name] = json_value(db, row[k]);
            out += obj.dump() + "\n";
        }
        break;
    }
    return out;
}

void Session::define_concepts(const std::vector<std::pair<std::size_t, std::string>>& lines,
                              std::size_t& line) {
    std::vector<ConceptSpec> specs;
    for (const auto& [n, text] : lines) {
        line = n;
        specs.push_back(io::parse_concept(text));
    }
    try {
        engine_.write([&](Database& db) { db.define_concepts(specs); });
    } catch (const Error& e) {
        line = lines.front().first;
        for (std::size_t i = 0; i < specs.size(); ++i)
            if (specs[i].name == e.subject()) line = lines[i].first;
        throw;
    }
}

void Session::print_cube(std::ostream& out) const {
    const auto db = engine_.snapshot();
    const auto cells = analytics::build_cube(*db, *cube_);
    query::ResultConcept r;
    for (const auto& a : cube_->axes) {
        std::string name = db->schema().name_of(a.concept_id);
        const std::string base = name;
        for (int k = 2; std::any_of(r.columns.begin(), r.columns.end(),
                                    [&](const auto& c) { return c.name == name; });
             ++k)
            name = base + "_" + std::to_string(k);
        r.columns.push_back({name, a.concept_id});
    }
    r.columns.push_back({query::agg_name(cube_->agg), kTop});
    for (const auto& c : cells) {
        if (c.facts == 0 && !cube_include_empty_) continue;
        std::vector<Value> row(c.coords.begin(), c.coords.end());
        row.push_back(c.value.value_or(Null{}));
        r.rows.push_back(std::move(row));
    }
    out << render(*db, r, format_);
}

void Session::print_tree(std::ostream& out) const {
    const auto db = engine_.snapshot();
    out << analytics::dump_tree(*db, analytics::hierarchy_tree(*db, tree_, tree_depth_));
}

bool Session::execute(std::string_view statement, std::ostream& out) {
    const std::string_view text = trim(statement);
    if (is_comment(text)) return true;
    if (text == "quit" || text == "exit") return false;

    if (io::is_concept_line(text)) {
        const ConceptSpec spec = io::parse_concept(text);
        engine_.write([&](Database& db) { db.define_concepts({spec}); });
        return true;
    }
    if (io::is_definition_line(text)) {
        engine_.write([&](Database& db) { io::apply_definition(db, text); });
        return true;
    }
    if (is_query(text)) {
        const auto db = engine_.snapshot();
        out << render(*db, query::evaluate_query(*db, text), format_);
        return true;
    }
    if (io::is_data_line(text)) {
        engine_.write([&](Database& db) {
            io::DataLine d = io::parse_data_line(text, db.schema());
            if (d.id)
                throw Error(ErrorCode::ParseError, "explicit item ids are only valid in snapshots");
            db.insert(d.concept_name, std::move(d.values));
        });
        return true;
    }

    Args a(text);
    const std::string cmd = a.word("a command");
    const auto snap = engine_.snapshot();
    const Schema& s = snap->schema();

    if (cmd == "schema") {
        a.end();
        for (ConceptId c : s.topological_order()) out << io::print_concept(s, c) << "\n";
        for (const auto& d : snap->catalog().definitions())
            out << io::definition_text(s, d) << "\n";
    } else if (cmd == "format") {
        const std::string name = a.word("table, csv or jsonl");
        a.end();
        const auto f = parse_format(name);
        if (!f) throw Error(ErrorCode::SyntaxError, "unknown format '" + name + "'");
        format_ = *f;
    } else if (cmd == "load") {
        const std::string path(a.rest());
        engine_.replace(io::load_snapshot_file(path));
        cube_.reset();
        tree_ = {};
    } else if (cmd == "save") {
        io::save_snapshot_file(*snap, std::string(a.rest()));
    } else if (cmd == "gc") {
        a.end();
        const auto collected = engine_.write([](Database& db) { return db.collect_garbage(); });
        if (collected.empty()) out << "(none)\n";
        for (ItemRef r : collected) out << s.format_value(r) << "\n";
    } else if (cmd == "delete") {
        const ItemRef item = a.ref(s);
        a.end();
        const auto report = engine_.write([&](Database& db) { return db.erase(item); });
        for (ItemRef r : report.deleted) out << "deleted " << s.format_value(r) << "\n";
        for (const auto& n : report.nulled)
            out << "nulled " << s.format_value(n.item) << "." << n.dimension << "\n";
    } else if (cmd == "update") {
        const ItemRef item = a.ref(s);
        a.take(K::Dot, "'.'");
        const std::string dim = a.dotted("a dimension");
        a.take(K::Assign, "'='");
        const Value v = query::evaluate_scalar(*snap, query::parse_expr(a.rest(), s));
        engine_.write([&](Database& db) { db.update(item, dim, v); });
    } else if (cmd == "mv") {
        const std::string op = a.word("add or delete");
        if (op != "add" && op != "delete") throw Error(ErrorCode::SyntaxError, "expected add or delete");
        const ItemRef item = a.ref(s);
        a.take(K::Dot, "'.'");
        const std::string prop = a.word("a property");
        const ItemRef target = a.ref(s);
        a.end();
        engine_.write([&](Database& db) {
            if (op == "add") db.mv_add(item, prop, target);
            else db.mv_delete(item, prop, target);
        });
    } else if (cmd == "cube") {
        analytics::CubeSpec spec;
        spec.fact = s.id_of(a.word("a fact concept"));
        auto [fn, measure] = aggregate_call(a, s);
        spec.agg = fn;
        spec.measure = std::move(measure);
        a.word("by");
        do {
            const std::string path = a.dotted("an axis path");
            spec.axes.push_back(path == s.name_of(spec.fact)
                                    ? analytics::make_axis(*snap, spec.fact, {})
                                    : analytics::make_axis(*snap, spec.fact, split_dots(path)));
        } while (a.accept(K::Comma));
        bool include_empty = false;
        if (a.accept(K::Bar)) {
            std::string_view f = a.rest();
            constexpr std::string_view flag = "--include-empty";
            if (f.size() >= flag.size() && f.substr(f.size() - flag.size()) == flag) {
                include_empty = true;
                f = trim(f.substr(0, f.size() - flag.size()));
            }
            spec.filters.push_back(query::parse_expr(f, s));
        } else if (a.accept(K::Minus)) {
            a.take(K::Minus, "'--include-empty'");
            a.word("include");
            a.take(K::Minus, "'--include-empty'");
            a.word("empty");
            include_empty = true;
        }
        a.end();
        (void)analytics::build_cube(*snap, spec);
        cube_ = std::move(spec);
        cube_include_empty_ = include_empty;
        print_cube(out);
    } else if (cmd == "rollup" || cmd == "drilldown") {
        if (!cube_) throw Error(ErrorCode::NoSuchLevel, "no cube has been built");
        const std::size_t axis = axis_index(*snap, *cube_, a);
        const std::string via = a.word("a dimension");
        a.end();
        cube_ = analytics::change_level(*snap, *cube_, axis,
                                        cmd == "rollup" ? analytics::LevelChange::roll_up
                                                        : analytics::LevelChange::drill_down,
                                        via);
        print_cube(out);
    } else if (cmd == "infer") {
        analytics::ConstraintSet inputs;
        if (!a.at(K::Minus)) {
            do {
                const ConceptId c = s.id_of(a.word("a concept"));
                a.take(K::Assign, "'='");
                a.take(K::LBrace, "'{'");
                auto& allowed = inputs[c];
                if (!a.accept(K::RBrace)) {
                    do {
                        const ItemRef r = a.ref(s);
                        if (r.concept_id != c || !snap->store().contains(r))
                            throw Error(ErrorCode::UnknownItem,
                                        s.format_value(r) + " is not an item of '" + s.name_of(c) + "'");
                        allowed.insert(r);
                    } while (a.accept(K::Comma));
                    a.take(K::RBrace, "'}'");
                }
            } while (a.accept(K::Comma));
        }
        a.take(K::Minus, "'->'");
        a.take(K::RAngle, "'->'");
        const ConceptId target = s.id_of(a.word("a target concept"));
        a.end();
        const auto result = analytics::infer(*snap, inputs, target);
        if (format_ == Format::table) {
            for (ItemRef r : result) {
                const Value v = snap->label_value(r);
                out << (is_null(v) ? s.format_value(r) : table_cell(*snap, v)) << "\n";
            }
        } else {
            query::ResultConcept r;
            r.columns.push_back({s.name_of(target), target});
            for (ItemRef item : result) r.rows.push_back({item});
            out << render(*snap, r, format_);
        }
    } else if (cmd == "tree") {
        if (!a.done()) {
            analytics::TreeLevel level;
            level.concept_id = s.id_of(a.word("a concept"));
            level.shown = shown_list(a);
            level.filter = filter_clause(a, s);
            a.end();
            analytics::TreeSpec next{{std::move(level)}};
            (void)analytics::hierarchy_tree(*snap, next, 1);
            tree_ = std::move(next);
        }
        if (tree_.levels.empty()) throw Error(ErrorCode::InvalidTreeSpec, "no tree has been started");
        print_tree(out);
    } else if (cmd == "expand") {
        if (tree_.levels.empty()) throw Error(ErrorCode::InvalidTreeSpec, "no tree has been started");
        analytics::TreeLevel level;
        level.concept_id = s.id_of(a.word("a concept"));
        a.word("via");
        level.via = a.dotted("an expansion");
        level.shown = shown_list(a);
        level.filter = filter_clause(a, s);
        a.end();
        analytics::TreeSpec next = tree_;
        next.levels.push_back(std::move(level));
        (void)analytics::expansion_rule(*snap, next, next.levels.size() - 1);
        tree_ = std::move(next);
        print_tree(out);
    } else if (cmd == "filter") {
        if (tree_.levels.empty()) throw Error(ErrorCode::InvalidTreeSpec, "no tree has been started");
        const std::string_view f = a.rest();
        analytics::TreeSpec next = tree_;
        next.levels.back().filter =
            f.empty() ? std::nullopt : std::optional<query::Expr>(query::parse_expr(f, s));
        (void)analytics::hierarchy_tree(*snap, next, tree_depth_);
        tree_ = std::move(next);
        print_tree(out);
    } else if (cmd == "depth") {
        const auto n = a.take(K::Int, "a depth").int_value;
        a.end();
        tree_depth_ = static_cast<std::size_t>(n);
        if (!tree_.levels.empty()) print_tree(out);
    } else if (cmd == "group") {
        const ConceptId g = s.id_of(a.word("a group concept"));
        a.word("by");
        const std::string member = a.dotted("a member path or property");
        auto [fn, measure] = aggregate_call(a, s);
        a.end();
        out << render(*snap, analytics::group_aggregate(*snap, g, member, measure, fn), format_);
    } else if (cmd == "merge") {
        const std::string super = a.word("a superconcept");
        a.word("into");
        const std::string sub = a.word("a subconcept");
        a.end();
        engine_.write([&](Database& db) {
            db.merge_concept(db.schema().id_of(super), db.schema().id_of(sub));
        });
    } else if (cmd == "split") {
        const std::string c = a.word("a concept");
        a.take(K::LParen, "'('");
        std::vector<std::string> dims;
        do dims.push_back(a.dotted("a dimension"));
        while (a.accept(K::Comma));
        a.take(K::RParen, "')'");
        a.word("as");
        const std::string fresh = a.word("a new concept name");
        a.end();
        engine_.write([&](Database& db) { db.split_concept(db.schema().id_of(c), dims, fresh); });
    } else if (cmd == "drop") {
        const std::string c = a.word("a concept");
        a.end();
        engine_.write([&](Database& db) { db.remove_concept(db.schema().id_of(c)); });
    } else {
        throw Error(ErrorCode::SyntaxError, "unknown command '" + cmd + "'");
    }
    return true;
}

int Session::run_script(std::string_view text, std::ostream& out, std::ostream& err) {
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::size_t start = 0;
    for (std::size_t n = 1; start < text.size(); ++n) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        lines.emplace_back(n, std::string(trim(text.substr(start, nl - start))));
        start = nl + 1;
    }

    std::size_t i = 0;
    while (i < lines.size()) {
        if (is_comment(lines[i].second)) {
            ++i;
            continue;
        }
        const std::size_t first = lines[i].first;
        std::string stmt = lines[i].second;
        std::vector<std::pair<std::size_t, std::string>> batch;
        while (i < lines.size() &&
               (io::is_concept_line(lines[i].second) || (!batch.empty() && is_comment(lines[i].second)))) {
            if (io::is_concept_line(lines[i].second)) batch.push_back(lines[i]);
            ++i;
        }
        if (batch.empty()) {
            int depth = brace_delta(lines[i].second);
            ++i;
            while (depth > 0 && i < lines.size()) {
                stmt += "\n" + lines[i].second;
                depth += brace_delta(lines[i].second);
                ++i;
            }
        }
        std::size_t line = first;
        try {
            if (!batch.empty()) define_concepts(batch, line);
            else if (!execute(stmt, out)) return 0;
        } catch (const Error& e) {
            err << "error: line " << line << ": " << e.what() << "\n";
            return 1;
        }
    }
    return 0;
}

void Session::repl(std::istream& in, std::ostream& out, std::ostream& err, bool prompt) {
    std::string stmt;
    int depth = 0;
    std::string line;
    for (;;) {
        if (prompt) out << (stmt.empty() ? "codm> " : "  ... ") << std::flush;
        if (!std::getline(in, line)) break;
        stmt += (stmt.empty() ? "" : "\n") + line;
        depth += brace_delta(line);
        if (depth > 0) continue;
        try {
            const bool go_on = execute(stmt, out);
            stmt.clear();
            depth = 0;
            if (!go_on) break;
        } catch (const Error& e) {
            err << "error: " << e.what() << "\n";
            stmt.clear();
            depth = 0;
        }
        out << std::flush;
    }
}

} // namespace codm::cli
