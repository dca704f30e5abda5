#pragma once

//
// ... effres header files
//
#include <effres/common.hpp>
#include <effres/graph.hpp>
#include <effres/ordering.hpp>
#include <effres/cholesky.hpp>
#include <effres/approx_inverse.hpp>
#include <effres/resistance.hpp>
#include <effres/synthetic.hpp>
#include <effres/io.hpp>
#include <effres/pg/netlist.hpp>
#include <effres/pg/partition.hpp>
#include <effres/pg/dc.hpp>
#include <effres/pg/reduce.hpp>
