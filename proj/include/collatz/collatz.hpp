#pragma once

#include "collatz/nat.hpp"
#include "collatz/kernel.hpp"
#include "collatz/classifier.hpp"
#include "collatz/checkpoint.hpp"
#include "collatz/census.hpp"
#include "collatz/report.hpp"
