import pytest

TABLE1_TEXT = """\
hameM O
this B-CW
magic I-CW
moment I-CW
"""

# Same sentence with a language-id column between token and tag.
TABLE1_LANG_TEXT = """\
hameM\tHi\tO
this\tEn\tB-CW
magic\tEn\tI-CW
moment\tEn\tI-CW
"""

TABLE2_TEXT = """\
sIriyala O
naMbara O
xvArA O
kleding B-PROD
in I-PROD
de I-PROD
oudheid I-PROD
kI O
pahacAna O
kareM O

what O
city O
is O
dig B-CW
me I-CW
out I-CW
in? O

AmAra O
das B-CW
testament I-CW
mUlya O
kawa? O
"""

MULTICONER_TEXT = """\
# id 5bb93fba-ba27-4a91-9b6d-ed1a9e4ff94b domain=mix
what _ _ O
city _ _ O
is _ _ O
dig _ _ B-CW
me _ _ I-CW
out _ _ I-CW
in? _ _ O

# id 11f2ba6a-0fa1-4b95-80c6-ad48a4a47f41 domain=mix
AmAra _ _ O
das _ _ B-CW
testament _ _ I-CW
mUlya _ _ O
kawa? _ _ O
"""


@pytest.fixture
def table1_text():
    return TABLE1_TEXT


@pytest.fixture
def table1_lang_text():
    return TABLE1_LANG_TEXT


@pytest.fixture
def table2_text():
    return TABLE2_TEXT


@pytest.fixture
def multiconer_text():
    return MULTICONER_TEXT
