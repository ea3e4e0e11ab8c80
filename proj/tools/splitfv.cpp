// Command-line front end: splitfv CONFIG [--set key=value]...
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "splitfv/app.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Operator-splitting finite volume solver for balance laws and the factory production model"};
    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("config", config_path, "Configuration file (key = value lines)")->required()->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "Override a configuration key, e.g. --set n_cells=400")->take_all();
    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path, std::ios::binary);
        std::stringstream text;
        text << in.rdbuf();
        auto cfg = splitfv::parse_config(text.str());
        splitfv::apply_overrides(cfg, overrides);
        return splitfv::run_mode(cfg, std::cout);
    } catch (const splitfv::ConfigError& e) {
        std::cerr << "config error";
        if (e.line() > 0) std::cerr << " in " << config_path;
        std::cerr << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
