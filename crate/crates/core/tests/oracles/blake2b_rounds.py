import hashlib,struct
M=(1<<64)-1
IV=[0x6a09e667f3bcc908,0xbb67ae8584caa73b,0x3c6ef372fe94f82b,0xa54ff53a5f1d36f1,0x510e527fade682d1,0x9b05688c2b3e6c1f,0x1f83d9abfb41bd6b,0x5be0cd19137e2179]
S=[[0,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15],[14,10,4,8,9,15,13,6,1,12,0,2,11,7,5,3],[11,8,12,0,5,2,15,13,10,14,3,6,7,1,9,4],[7,9,3,1,13,12,11,14,2,6,5,10,4,0,15,8],[9,0,5,7,2,4,10,15,14,1,11,12,6,8,3,13],[2,12,6,10,0,11,8,3,4,13,7,5,15,14,1,9],[12,5,1,15,14,13,4,10,0,7,6,3,9,2,8,11],[13,11,7,14,12,1,3,9,5,0,15,4,8,6,2,10],[6,15,14,9,11,3,0,8,12,2,13,7,1,4,10,5],[10,2,8,4,7,6,1,5,15,11,9,14,3,12,13,0]]
def ror(x,n): return ((x>>n)|(x<<(64-n)))&M
def comp(h,blk,t,last,R):
    m=struct.unpack('<16Q',blk); v=h[:]+IV[:]; v[12]^=t&M; v[13]^=t>>64
    if last: v[14]^=M
    for r in range(R):
        s=S[r%10]
        for i,(a,b,c,d) in enumerate([(0,4,8,12),(1,5,9,13),(2,6,10,14),(3,7,11,15),(0,5,10,15),(1,6,11,12),(2,7,8,13),(3,4,9,14)]):
            x,y=m[s[2*i]],m[s[2*i+1]]
            v[a]=(v[a]+v[b]+x)&M; v[d]=ror(v[d]^v[a],32); v[c]=(v[c]+v[d])&M; v[b]=ror(v[b]^v[c],24)
            v[a]=(v[a]+v[b]+y)&M; v[d]=ror(v[d]^v[a],16); v[c]=(v[c]+v[d])&M; v[b]=ror(v[b]^v[c],63)
    return [h[i]^v[i]^v[i+8] for i in range(8)]
def b2(data,outlen,R=12):
    h=IV[:]; h[0]^=0x01010000^outlen
    blocks=[data[i:i+128] for i in range(0,len(data),128)] or [b'']
    t=0
    for k,b in enumerate(blocks):
        t+=len(b); h=comp(h,b.ljust(128,b'\0'),t,k==len(blocks)-1,R)
    return struct.pack('<8Q',*h)[:outlen]
if __name__=='__main__':
    for d in [b'',b'abc',bytes(1025)]:
        assert b2(d,32)==hashlib.blake2b(d,digest_size=32).digest()
    print(b2(b'',16,4).hex())
