#pragma once

#include "codm/analytics/cube.hpp"
#include "codm/analytics/hierarchy.hpp"
#include "codm/engine.hpp"
#include "codm/query/evaluator.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace codm::cli {

enum class Format { table, csv, jsonl };

std::optional<Format> parse_format(std::string_view name);

/// Tables show item labels; csv and jsonl show `Concept#id`.
std::string render(const Database& db, const query::ResultConcept& r, Format format);

/// Command interpreter shared by the REPL and the script runner. Every
/// command either fully applies or leaves the database untouched.
class Session {
public:
    explicit Session(Format format = Format::table) : format_(format) {}

    Format format() const { return format_; }
    void set_format(Format f) { format_ = f; }
    Engine& engine() { return engine_; }
    std::shared_ptr<const Database> db() const { return engine_.snapshot(); }

    /// Runs one statement. Returns false for `quit`. Throws Error.
    bool execute(std::string_view statement, std::ostream& out);

    /// Runs a whole script. Consecutive concept lines form one batch. Stops
    /// at the first error, reported on `err` as `error: line N: ...`.
    /// Returns the process exit code.
    int run_script(std::string_view text, std::ostream& out, std::ostream& err);

    /// Errors are reported and the loop goes on.
    void repl(std::istream& in, std::ostream& out, std::ostream& err, bool prompt);

private:
    /// `line` receives the script line of the definition that failed.
    void define_concepts(const std::vector<std::pair<std::size_t, std::string>>& lines,
                         std::size_t& line);
    void print_cube(std::ostream& out) const;
    void print_tree(std::ostream& out) const;

    Engine engine_;
    Format format_;
    std::optional<analytics::CubeSpec> cube_;
    bool cube_include_empty_ = false;
    analytics::TreeSpec tree_;
    std::size_t tree_depth_ = 0;
};

} // namespace codm::cli
