#pragma once

#include "bitext/backtranslation.hpp"
#include "bitext/bleu.hpp"
#include "bitext/cleaner.hpp"
#include "bitext/config.hpp"
#include "bitext/core.hpp"
#include "bitext/heuristics.hpp"
#include "bitext/io.hpp"
#include "bitext/lid.hpp"
#include "bitext/margin.hpp"
#include "bitext/pipeline.hpp"
#include "bitext/sft.hpp"
#include "bitext/stats.hpp"
#include "bitext/unicode.hpp"
