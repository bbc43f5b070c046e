#pragma once

#include "vitlca/costmodel.hpp"
#include "vitlca/decoders.hpp"
#include "vitlca/dictionary.hpp"
#include "vitlca/embedset.hpp"
#include "vitlca/error.hpp"
#include "vitlca/gramian.hpp"
#include "vitlca/harness.hpp"
#include "vitlca/lca.hpp"
#include "vitlca/synth.hpp"
