#pragma once

#include <ostream>

// Runs the full acceptance suite, printing one PASS/FAIL line per
// criterion. Returns the number of failed criteria.
int run_acceptance_suite(std::ostream& os);
