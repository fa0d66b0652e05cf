#include "arbor/acceptance.hpp"

int main() {
  auto results = arbor::run_acceptance();
  return arbor::report_acceptance(results) == 0 ? 0 : 1;
}
