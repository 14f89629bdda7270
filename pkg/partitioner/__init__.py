"""Latency/cost partitioning of workloads over heterogeneous IaaS platforms."""
