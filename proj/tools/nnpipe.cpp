// Command-line runner for pipeline descriptions.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "nnpipe/filter.hpp"
#include "nnpipe/pipeline.hpp"
#include "nnpipe/stats.hpp"

namespace {

std::vector<double> parse_rates(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(std::stod(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

// Prints the offending line with a caret under the column.
void show_position(const std::string& text, const nnpipe::ParseError& e) {
  std::size_t line = 1, begin = 0;
  for (std::size_t i = 0; i < text.size() && line < e.line(); ++i) {
    if (text[i] == '\n') {
      ++line;
      begin = i + 1;
    }
  }
  auto end = text.find('\n', begin);
  std::cerr << "  " << text.substr(begin, end == std::string::npos ? end : end - begin) << "\n  "
            << std::string(e.column() - 1, ' ') << "^\n";
}

int run(const std::string& text, double timeout_s, bool paced, bool stats,
        const std::string& dot_path, bool quiet) {
  std::unique_ptr<nnpipe::Pipeline> pipeline;
  try {
    pipeline = nnpipe::Pipeline::parse(text, {paced});
    pipeline->set_state(nnpipe::PipelineState::kReady);
  } catch (const nnpipe::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    show_position(text, e);
    return 2;
  } catch (const nnpipe::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  if (!dot_path.empty()) {
    std::ofstream dot(dot_path);
    dot << pipeline->export_dot();
    if (!dot) {
      std::cerr << "error: cannot write " << dot_path << '\n';
      return 1;
    }
  }
  try {
    auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
    auto report = pipeline->run_until_eos(timeout);
    if (!quiet) std::cout << nnpipe::format_report(report);
    if (stats) std::cout << nnpipe::report_json(report) << '\n';
  } catch (const nnpipe::RunError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (!quiet) std::cerr << nnpipe::format_report(e.report());
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor stream pipeline runner"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a pipeline description until end of stream");
  std::string text;
  double timeout = 60;
  bool paced = false, stats = false, quiet = false;
  std::string dot;
  run_cmd->add_option("pipeline", text, "pipeline description")->required();
  run_cmd->add_option("--timeout", timeout, "seconds before giving up")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--paced", paced, "sources follow the wall clock");
  run_cmd->add_flag("--stats", stats, "print statistics as JSON");
  run_cmd->add_option("--dot", dot, "write a GraphViz file of the negotiated pipeline");
  run_cmd->add_flag("--quiet", quiet, "no table output");

  auto* bench_cmd = app.add_subcommand("bench", "relative throughput of co-running models");
  std::string single, multi;
  unsigned hw = 1;
  bench_cmd->add_option("--single", single, "fps of each model alone, comma separated")->required();
  bench_cmd->add_option("--multi", multi, "fps of each model together")->required();
  bench_cmd->add_option("--hw", hw, "number of hardware units")->check(CLI::PositiveNumber);

  auto* elements_cmd = app.add_subcommand("elements", "list element kinds and backends");

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) return run(text, timeout, paced, stats, dot, quiet);
  if (*bench_cmd) {
    try {
      auto s = parse_rates(single);
      auto m = parse_rates(multi);
      std::printf("%+.2f%%\n", nnpipe::bench_relative_throughput(s, m, hw));
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
  }
  if (*elements_cmd) {
    auto& registry = nnpipe::ElementRegistry::instance();
    for (const auto& name : registry.kinds()) {
      const auto* k = registry.find(name);
      std::cout << name << "  " << k->description << '\n';
      for (const auto& p : k->properties) {
        std::cout << "    " << p.name;
        if (!p.default_value.empty()) std::cout << "=" << p.default_value;
        if (!p.help.empty()) std::cout << "  " << p.help;
        std::cout << '\n';
      }
    }
    std::cout << "backends:";
    for (const auto& b : nnpipe::BackendRegistry::instance().names()) std::cout << ' ' << b;
    std::cout << '\n';
  }
  return 0;
}
