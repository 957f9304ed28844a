#include <exception>
#include <iostream>
#include <vector>

#include "ppt/cli.hpp"

int main(int argc, char** argv) {
  try {
    const ppt::ExperimentSpec spec = ppt::parse_args(argc, argv);
    ppt::run_experiment(spec);
    return 0;
  } catch (const ppt::HelpRequested& h) {
    std::cout << h.what() << '\n';
    return 0;
  } catch (const ppt::UsageError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const ppt::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
