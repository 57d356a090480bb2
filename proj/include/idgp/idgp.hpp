#pragma once

#include "idgp/bench.hpp"
#include "idgp/common.hpp"
#include "idgp/descent.hpp"
#include "idgp/formulations.hpp"
#include "idgp/gen.hpp"
#include "idgp/instance.hpp"
#include "idgp/io.hpp"
#include "idgp/measures.hpp"
#include "idgp/pdb.hpp"
#include "idgp/sdp.hpp"
#include "idgp/solvers.hpp"
