"""Published per-class results of the final model (75/25 split).

Columns: category, precision, recall, f1, support.
"""

ROWS = [
    ('Baby Products', 0.89, 1.0, 0.94, 8),
    ('Health & Personal Care', 0.78, 0.85, 0.81, 46),
    ('Digital Music', 0.82, 0.64, 0.72, 22),
    ('Beauty', 0.71, 0.5, 0.59, 10),
    ('Sports & Outdoors', 0.69, 0.62, 0.65, 56),
    ('Arts, Crafts & Sewing', 1.0, 0.2, 0.33, 5),
    ('Video Games', 0.89, 0.53, 0.67, 32),
    ('Home & Kitchen', 0.84, 0.89, 0.87, 334),
    ('Kindle Store', 1.0, 0.67, 0.8, 3),
    ('Tools & Home Improvement', 0.75, 0.5, 0.6, 18),
    ('Collectibles & Fine Art', 0.87, 0.81, 0.84, 16),
    ('CDs & Vinyl', 0.83, 0.35, 0.49, 55),
    ('Patio, Lawn & Garden', 0.0, 0.0, 0.0, 7),
    ('Clothing, Shoes & Jewelry', 0.89, 0.76, 0.82, 162),
    ('Cell Phones & Accessories', 1.0, 0.14, 0.25, 7),
    ('Books', 0.96, 0.98, 0.98, 4883),
    ('Pet Supplies', 1.0, 0.11, 0.2, 9),
    ('Automotive', 1.0, 0.6, 0.75, 5),
    ('Musical Instruments', 1.0, 0.7, 0.82, 10),
    ('Movies & TV', 0.74, 0.69, 0.71, 161),
    ('Office Products', 1.0, 0.56, 0.71, 9),
    ('Toys & Games', 0.86, 0.24, 0.38, 25),
    ('Electronics', 0.82, 0.75, 0.78, 101),
    ('Grocery & Gourmet Food', 0.0, 0.0, 0.0, 2),
]

CATEGORY_AVERAGE = (0.81, 0.54, 0.61)
ABSOLUTE_AVERAGE = 0.94
TOTAL_SUPPORT = 5896
