#pragma once

#include "capture_check.hpp"
#include "link.hpp"
#include "modem.hpp"
#include "montecarlo.hpp"
#include "physics.hpp"
#include "report_io.hpp"
#include "run_config.hpp"
