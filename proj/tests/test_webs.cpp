#include <catch2/catch_amalgamated.hpp>
#include "oracles.hpp"
