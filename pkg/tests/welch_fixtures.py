"""Frozen reference values for Welch's t-test.

Each tuple is (sample_a, sample_b, t, two_tailed_p). The t and p values were
computed once, before the implementation was written, with an independent
reference statistical library (scipy.stats.ttest_ind, equal_var=False) and
are frozen here as the oracle.
"""

WELCH_FIXTURES = [
    ([86.9363, 78.8239, 89.8764, 113.6815, 75.2132, 89.2791, 84.325, 54.9659, 81.4777, 108.6279],
     [61.3009, 70.8244, 76.7336, 72.1404, 72.2734],
     2.6955454534623566, 0.01920028966026946),
    ([66.4597, 67.6936, 68.9732, 68.3785, 65.4216],
     [72.2911, 79.9253, 78.3547, 82.4023, 74.818, 80.2147, 79.343, 73.338, 80.5503, 77.5357, 88.1894],
     -7.684329700415505, 2.9054971224422464e-06),
    ([93.5466, 83.1805, 104.6986, 92.4095, 83.0621, 85.1627, 92.2056, 80.965, 101.6358, 85.0222, 84.7889],
     [76.6227, 76.7272, 78.9035, 68.1682, 92.1748, 71.66, 83.3771, 77.7348],
     3.285756357873157, 0.004673311287384985),
    ([99.1421, 103.6786, 84.3518, 91.7289, 90.5604, 78.5096],
     [63.1146, 64.1201, 62.7972, 63.7513, 64.619, 63.7954, 64.732, 64.3072, 64.9463, 65.0956, 63.9195, 64.408],
     7.195166456971044, 0.0007882467610385744),
    ([91.3945, 64.1845, 117.9849, 99.2149, 85.8879, 80.0835],
     [66.3187, 53.6251, 70.5887, 68.8049, 53.9217, 65.5762],
     3.3224332451122818, 0.01373153259551885),
    ([97.5762, 94.9871, 101.0226, 99.4216, 98.6866, 92.681],
     [101.9386, 88.0033, 101.535, 98.5637, 103.0327, 108.8246, 104.2197, 97.8766, 99.3723, 101.1977, 105.1762, 88.7056],
     -1.137980036183447, 0.27190984041757654),
    ([67.756, 63.2297, 71.6244, 62.6865, 69.2923, 73.0048],
     [62.2793, 69.3808, 64.3596, 56.9316, 70.5029, 72.1959, 67.6874, 62.5407, 66.5504, 65.0994, 63.3745, 59.3415],
     1.3389189519948894, 0.20844108599765274),
    ([83.4287, 85.4522, 80.7396, 96.233, 67.0385, 79.6599, 96.524, 76.5889, 93.4508, 97.1863, 99.5786],
     [71.2645, 41.5456, 70.7433, 62.8319, 62.9768, 50.324, 79.5853, 61.4245, 66.7028],
     4.828929519280486, 0.00016916657773645096),
    ([100.2725, 100.098, 101.467, 96.7074, 101.7037, 100.4544, 102.4047, 94.1057, 99.7676, 96.121],
     [95.4369, 94.4715, 77.104, 81.1973, 73.7069, 78.239, 101.8076, 78.0997, 83.0238],
     4.2621444235274994, 0.0020539340848411453),
    ([91.3865, 75.8785, 78.2602, 76.6384, 75.5201, 86.7326],
     [65.2377, 71.5169, 59.7309],
     3.4937876623655395, 0.019746572100980547),
    ([76.8903, 85.6381, 72.5957, 80.6175, 71.5892, 77.131, 84.213, 74.1169, 78.8896, 83.5468],
     [98.1077, 93.1333, 86.6593, 85.1583],
     -3.6211211081022925, 0.01668994139644154),
    ([86.9969, 76.0172, 79.3447, 87.6693, 86.2646, 96.4069, 84.6186, 64.9673, 104.3584, 81.7709, 78.0352],
     [73.1079, 91.4153, 75.356, 63.3702, 48.9683],
     1.7943887993273548, 0.12572547854691649),
    ([94.3981, 85.993, 97.8708, 81.3163, 74.8477],
     [100.8132, 83.4249, 99.1088, 64.3399],
     -0.00385675421354852, 0.9970894195835851),
    ([65.2201, 43.3078, 79.8652, 64.8233, 59.0813, 62.9923, 55.9763, 57.181, 81.8166, 71.5505],
     [59.0237, 63.9543, 65.8578, 66.9508, 67.1012, 63.2226, 63.1159],
     0.0016491165162762196, 0.998715126238616),
    ([86.1971, 77.5057, 92.335, 76.337, 79.7876, 70.0091],
     [77.5262, 81.0752, 74.16],
     0.7338997630739804, 0.48686332861786064),
    ([81.6506, 94.5528, 98.1777],
     [98.171, 99.6514, 100.8261, 98.0871, 101.1243, 98.184, 98.8512, 98.264, 97.028, 101.4629, 98.2275, 98.0296],
     -1.4967275617932967, 0.2715440105426947),
    ([69.3788, 77.5501, 56.7317, 57.0012, 66.0788, 65.6698, 63.5649, 38.2786],
     [88.9691, 87.5722, 78.1425, 90.9245, 82.4499],
     -5.04499236134427, 0.00045039877265587176),
    ([84.2724, 81.0324, 75.7319, 74.2451, 83.1738, 76.0979],
     [115.7447, 85.3603, 87.9436, 73.7651, 74.1237, 84.7893, 93.7338, 86.878],
     -1.7488363379633756, 0.11481918695892158),
    ([68.5378, 73.4373, 67.2744, 58.2708, 68.8336, 75.5806, 70.5529, 75.6579],
     [103.355, 83.9917, 101.5512, 101.0225, 94.98, 103.0179, 90.0888, 110.0091],
     -8.074896165335657, 2.8873658770803985e-06),
    ([88.8456, 82.8182, 88.2852, 92.9256, 87.4319, 85.2465, 91.1489, 88.8041, 89.7295, 87.2746, 84.6233],
     [82.6884, 77.9015, 99.909, 95.5957, 93.2034, 85.058, 80.1009, 79.654, 83.7205],
     0.5414456665086499, 0.6002792355578003),
]
