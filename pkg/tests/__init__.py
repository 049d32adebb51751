# Test package for exemplar-wsd
