#pragma once

#include "toeplab/harness/config.hpp"
#include "toeplab/harness/experiments.hpp"
#include "toeplab/harness/parallel.hpp"
#include "toeplab/harness/report.hpp"
