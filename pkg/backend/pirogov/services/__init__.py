# Services module for counting, sampling and verification
