#pragma once

#include "tailcause/error.hpp"
#include "tailcause/gpd.hpp"
#include "tailcause/ingest.hpp"
#include "tailcause/io.hpp"
#include "tailcause/permtest.hpp"
#include "tailcause/rng.hpp"
#include "tailcause/scm.hpp"
#include "tailcause/stats.hpp"
#include "tailcause/tail_coef.hpp"
