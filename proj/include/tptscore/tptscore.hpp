#pragma once

#include "tptscore/core_model.hpp"
#include "tptscore/data_files.hpp"
#include "tptscore/error.hpp"
#include "tptscore/ingest.hpp"
#include "tptscore/pattern_matcher.hpp"
#include "tptscore/percentile_store.hpp"
#include "tptscore/pipeline.hpp"
#include "tptscore/report.hpp"
#include "tptscore/scoring.hpp"
#include "tptscore/suffix_list.hpp"
#include "tptscore/url.hpp"
