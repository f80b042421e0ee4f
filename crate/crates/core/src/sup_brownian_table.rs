// Generated by sup_brownian_critical_values; see sup_brownian_table().
const SUP_BROWNIAN_QUANTILES: [f64; 101] = [
    0.4996, 0.5390, 0.5670, 0.5886, 0.6086, 0.6270, 0.6439, 0.6597, 0.6746, 0.6887, 0.7025, 0.7153,
    0.7279, 0.7407, 0.7528, 0.7649, 0.7761, 0.7870, 0.7979, 0.8088, 0.8196, 0.8301, 0.8415, 0.8520,
    0.8623, 0.8735, 0.8848, 0.8951, 0.9058, 0.9166, 0.9275, 0.9382, 0.9490, 0.9594, 0.9700, 0.9811,
    0.9918, 1.0025, 1.0133, 1.0249, 1.0364, 1.0478, 1.0588, 1.0700, 1.0810, 1.0922, 1.1041, 1.1159,
    1.1286, 1.1408, 1.1525, 1.1644, 1.1763, 1.1892, 1.2025, 1.2161, 1.2295, 1.2431, 1.2562, 1.2705,
    1.2847, 1.2993, 1.3150, 1.3302, 1.3458, 1.3628, 1.3791, 1.3961, 1.4138, 1.4316, 1.4494, 1.4689,
    1.4872, 1.5046, 1.5242, 1.5453, 1.5652, 1.5869, 1.6090, 1.6320, 1.6563, 1.6831, 1.7099, 1.7384,
    1.7684, 1.8003, 1.8339, 1.8691, 1.9057, 1.9454, 1.9914, 2.0411, 2.0957, 2.1612, 2.2380, 2.3187,
    2.4280, 2.5647, 2.8181, 3.0397, 3.4727];
