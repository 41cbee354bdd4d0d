#pragma once

#include "config.hpp"
#include "corpus.hpp"
#include "discovery.hpp"
#include "error.hpp"
#include "info.hpp"
#include "infomap.hpp"
#include "lexicon.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "semspace.hpp"
#include "similarity.hpp"
#include "som.hpp"
#include "synth.hpp"
#include "text.hpp"
