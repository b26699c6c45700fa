#include "codm/cli/session.hpp"
#include "codm/io/text.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <unistd.h>

int main(int argc, char** argv) {
    using codm::cli::Format;

    CLI::App app{"codm: concept-oriented in-memory database"};
    app.require_subcommand(1);
    std::string format_name = "table";
    app.add_option("--format", format_name, "Output format")
        ->check(CLI::IsMember({"table", "csv", "jsonl"}));

    auto* repl = app.add_subcommand("repl", "Interactive command loop");
    std::string script;
    auto* run = app.add_subcommand("run", "Run a script, stopping at the first error");
    run->add_option("script", script, "Script file")->required();
    std::string snapshot;
    std::string query_text;
    auto* query = app.add_subcommand("query", "Evaluate one query against a snapshot");
    query->add_option("-d,--database", snapshot, "Snapshot file")->required();
    query->add_option("query", query_text, "Query text")->required();

    CLI11_PARSE(app, argc, argv);

    Format format = *codm::cli::parse_format(format_name);
    if (const char* env = std::getenv("CODM_FORMAT")) {
        if (auto f = codm::cli::parse_format(env)) format = *f;
        else {
            std::cerr << "error: CODM_FORMAT must be table, csv or jsonl\n";
            return 2;
        }
    }
    codm::cli::Session session(format);

    try {
        if (*run) return session.run_script(codm::io::read_file(script), std::cout, std::cerr);
        if (*query) {
            session.engine().replace(codm::io::load_snapshot_file(snapshot));
            session.execute(query_text, std::cout);
            return 0;
        }
        if (*repl) {
            session.repl(std::cin, std::cout, std::cerr, isatty(STDIN_FILENO) != 0);
            return 0;
        }
    } catch (const codm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
